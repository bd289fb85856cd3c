mod common;

use common::{direct_sum, random_state, random_transmittances};
use cvmux_core::gaussian::{
    apply_network, beamsplitter_matrix, embed_vacuum, restrict, symplectic_spectrum, NetworkParams,
    SymplecticForm,
};
use cvmux_core::security::{holevo_bound, key_rate, pessimistic_adjust, pessimistic_key_rate};
use cvmux_core::source::{simulate, CrosstalkMode, SourceSpec};
use cvmux_core::{ChannelSpec, ErrorModel, ModePartition, Quadrature};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn random_params(partition: &ModePartition, seed: u64) -> NetworkParams {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x9e37_79b9);
    let na = cvmux_core::gaussian::coupler_count(partition.alice().len());
    let nb = cvmux_core::gaussian::coupler_count(partition.bob().len());
    NetworkParams::new(
        random_transmittances(na, &mut rng),
        random_transmittances(nb, &mut rng),
    )
    .unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn network_preserves_spectrum(seed in any::<u64>(), half in 1usize..6) {
        let n = 2 * half;
        let state = random_state(n, seed);
        let p = ModePartition::halves(n).unwrap();
        let out = apply_network(&state, &p, &random_params(&p, seed)).unwrap();
        let before = symplectic_spectrum(&state).unwrap();
        let after = symplectic_spectrum(&out).unwrap();
        prop_assert!(max_abs_diff(&before, &after) <= 1e-10);
    }

    #[test]
    fn beamsplitter_is_symplectic(n in 2usize..8, i in 0usize..8, j in 0usize..8, t in 0.0f64..=1.0) {
        prop_assume!(i < n && j < n && i != j);
        let b = beamsplitter_matrix(n, i, j, t).unwrap();
        prop_assert!(SymplecticForm::new(n).symplectic_residual(&b) <= 1e-12);
    }

    #[test]
    fn holevo_is_invariant(seed in any::<u64>(), half in prop::sample::select(vec![4usize, 8]), t in 0.1f64..=0.9) {
        let n = 2 * half;
        let state = random_state(n, seed);
        let p = ModePartition::halves(n).unwrap();
        let ch = ChannelSpec::Uniform(t);
        let out = apply_network(&state, &p, &random_params(&p, seed)).unwrap();
        let a = holevo_bound(&state, &p, &ch, Quadrature::P).unwrap();
        let b = holevo_bound(&out, &p, &ch, Quadrature::P).unwrap();
        prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }

    #[test]
    fn direct_sum_spectrum_is_union(s1 in any::<u64>(), s2 in any::<u64>(), n1 in 2usize..5, n2 in 2usize..5) {
        let a = random_state(n1, s1);
        let b = random_state(n2, s2);
        let mut union = symplectic_spectrum(&a).unwrap();
        union.extend(symplectic_spectrum(&b).unwrap());
        union.sort_by(f64::total_cmp);
        let sum = symplectic_spectrum(&direct_sum(&a, &b)).unwrap();
        prop_assert!(max_abs_diff(&union, &sum) <= 1e-10);
    }

    #[test]
    fn restrict_undoes_embed(seed in any::<u64>(), n in 2usize..6, k in 1usize..4) {
        let s = random_state(n, seed);
        let e = embed_vacuum(&s, k).unwrap();
        let keep: Vec<usize> = (0..n).collect();
        let back = restrict(&e, &keep).unwrap();
        prop_assert_eq!(back.matrix(), s.matrix());
    }

    #[test]
    fn key_shrinks_with_fewer_samples(seed in 0u64..1000, db in 2.0f64..8.0, t in 0.2f64..1.0) {
        let spec = SourceSpec {
            crosstalk_mode: CrosstalkMode::LocalOnly,
            crosstalk_strength: 0.3,
            rng_seed: seed,
            ..SourceSpec::uniform(3, db)
        };
        let s = simulate(&spec).unwrap();
        let p = spec.partition().unwrap();
        let ch = ChannelSpec::Uniform(t);
        let k = |e: ErrorModel| pessimistic_key_rate(&s, &p, &ch, 0.96, Quadrature::P, e).unwrap().key_rate;
        let inf = k(ErrorModel::Asymptotic);
        prop_assume!(inf > 0.0);
        let ks: Vec<f64> = [5_000u64, 10_000, 40_000]
            .iter()
            .map(|&n| k(ErrorModel::finite(n).unwrap()))
            .collect();
        prop_assert!(ks[0] <= ks[1] && ks[1] <= ks[2] && ks[2] <= inf, "{ks:?} {inf}");
    }

    #[test]
    fn key_shrinks_with_loss(seed in any::<u64>(), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0) {
        let s = random_state(4, seed);
        let p = ModePartition::halves(4).unwrap();
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let k = |t| key_rate(&s, &p, &ChannelSpec::Uniform(t), 0.96, Quadrature::P).unwrap().key_rate;
        prop_assert!(k(lo) <= k(hi) + 1e-12);
    }
}

#[test]
fn asymptotic_limit_recovers_matrix() {
    let s = random_state(4, 11);
    assert_eq!(
        pessimistic_adjust(&s, ErrorModel::Asymptotic).matrix(),
        s.matrix()
    );
    let mut last = f64::INFINITY;
    for n in [1e4, 1e8, 1e12, 1e16, 1e18] {
        let adjusted = pessimistic_adjust(&s, ErrorModel::finite(n as u64).unwrap());
        let diff = (adjusted.matrix() - s.matrix()).abs().max();
        assert!(diff < last);
        last = diff;
    }
    assert!(last < 1e-7);
}
