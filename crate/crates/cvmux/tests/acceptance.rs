//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test -p cvmux --test acceptance -- --nocapture`.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::oracle::tmsv_through_loss;
use common::{random_state, random_unit, verdict};
use cvmux_core::analysis::{
    decoupling_efficiency, linear_fit_prediction_bands, loss_point, loss_sweep,
    two_sided_t_quantile, Cutoff, Processing,
};
use cvmux_core::decoupler::{basin_hop, decouple, MiObjective, NetworkParams, OptimizerConfig};
use cvmux_core::gaussian::{
    apply_network, beamsplitter_matrix, coupler_count, symplectic_spectrum, SymplecticForm,
};
use cvmux_core::security::{
    holevo_bound, key_rate, pairwise_mutual_information, pessimistic_adjust, pessimistic_key_rate,
};
use cvmux_core::source::{generate_epr_array, simulate, CrosstalkMode, SourceSpec};
use cvmux_core::{ChannelSpec, CovarianceState, ErrorModel, ModePartition, Quadrature};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_params(partition: &ModePartition, rng: &mut StdRng) -> NetworkParams {
    let na = coupler_count(partition.alice().len());
    let nb = coupler_count(partition.bob().len());
    NetworkParams::new(random_unit(na, rng), random_unit(nb, rng)).unwrap()
}

fn tmsv(v: f64) -> CovarianceState {
    let c = (v * v - 1.0).sqrt();
    #[rustfmt::skip]
    let data = [
        v, 0.0, c, 0.0,
        0.0, v, 0.0, -c,
        c, 0.0, v, 0.0,
        0.0, -c, 0.0, v,
    ];
    CovarianceState::from_row_major(2, &data).unwrap()
}

fn crosstalked(
    n_pairs: usize,
    db: f64,
    mode: CrosstalkMode,
    strength: f64,
    seed: u64,
) -> SourceSpec {
    SourceSpec {
        crosstalk_mode: mode,
        crosstalk_strength: strength,
        rng_seed: seed,
        ..SourceSpec::uniform(n_pairs, db)
    }
}

#[test]
fn criterion_01_holevo_invariance() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for half in [4usize, 8] {
        let n = 2 * half;
        let p = ModePartition::halves(n).unwrap();
        for k in 0..30 {
            let state = random_state(n, 1000 * half as u64 + k);
            let t = 0.1 * rng.gen_range(1..=9) as f64;
            let ch = ChannelSpec::Uniform(t);
            let out = apply_network(&state, &p, &random_params(&p, &mut rng)).unwrap();
            let a = holevo_bound(&state, &p, &ch, Quadrature::P).unwrap();
            let b = holevo_bound(&out, &p, &ch, Quadrature::P).unwrap();
            worst = worst.max((a - b).abs());
            trials += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "Holevo invariance",
        worst <= 1e-8 && secs < 60.0,
        &format!("max |dchi| = {worst:.3e} over {trials} triples at 4+4 and 8+8 (limit 1e-8), {secs:.2} s"),
    );
}

#[test]
fn criterion_02_single_pair_oracle() {
    let start = Instant::now();
    let p = ModePartition::halves(2).unwrap();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for v in [1.5, 2.0, 5.0, 20.0] {
        let state = tmsv(v);
        for k in 1..=20 {
            let t = 0.05 * k as f64;
            let ch = ChannelSpec::transmittance(t.min(1.0)).unwrap();
            let want = tmsv_through_loss(v, t.min(1.0));
            for beta in [0.9, 0.96, 1.0] {
                let r = key_rate(&state, &p, &ch, beta, Quadrature::P).unwrap();
                worst = worst.max((r.key_rate - want.key(beta)).abs());
                worst = worst.max((r.total_mi - want.mi).abs());
                worst = worst.max((r.holevo - want.holevo).abs());
                cases += 1;
            }
        }
    }
    verdict(
        2,
        "single-pair oracle equivalence",
        worst <= 1e-9,
        &format!(
            "max abs deviation {worst:.3e} over {cases} (V, T, beta) cases (limit 1e-9), {:.2} s",
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_symplectic_correctness() {
    let mut bs_worst: f64 = 0.0;
    for n in 2..=6 {
        let omega = SymplecticForm::new(n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..=20 {
                    let b = beamsplitter_matrix(n, i, j, k as f64 / 20.0).unwrap();
                    bs_worst = bs_worst.max(omega.symplectic_residual(&b));
                }
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(3);
    let mut spec_worst: f64 = 0.0;
    for k in 0..100 {
        let n = 2 * rng.gen_range(1..=6);
        let state = random_state(n, 5000 + k);
        let p = ModePartition::halves(n).unwrap();
        let out = apply_network(&state, &p, &random_params(&p, &mut rng)).unwrap();
        let a = symplectic_spectrum(&state).unwrap();
        let b = symplectic_spectrum(&out).unwrap();
        for (x, y) in a.iter().zip(&b) {
            spec_worst = spec_worst.max((x - y).abs());
        }
    }
    verdict(
        3,
        "symplectic correctness",
        bs_worst <= 1e-12 && spec_worst <= 1e-10,
        &format!(
            "max |T Omega T^T - Omega| = {bs_worst:.3e} (limit 1e-12); max spectrum change {spec_worst:.3e} over 100 networks (limit 1e-10)"
        ),
    );
}

#[test]
fn criterion_04_crosstalk_recovery() {
    let start = Instant::now();
    let ch = ChannelSpec::Uniform(0.2);
    let beta = 0.96;
    let mut min_recovery = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    let seeds = [0u64, 1, 2];
    for &seed in &seeds {
        let spec = crosstalked(8, 3.0, CrosstalkMode::LocalOnly, 0.3, seed);
        let p = spec.partition().unwrap();
        let (_, clean_mi) =
            pairwise_mutual_information(&generate_epr_array(&spec).unwrap(), &p, Quadrature::P)
                .unwrap();
        let mixed = simulate(&spec).unwrap();
        let config = OptimizerConfig {
            hops: 20,
            rng_seed: seed,
            ..Default::default()
        };
        let d = decouple(&mixed, &p, &ch, beta, &config).unwrap();
        min_recovery = min_recovery.min(d.search.objective / clean_mi);
        min_ratio = min_ratio.min(d.key_ratio());
        println!(
            "    seed {seed}: MI {:.4} -> {:.4} of {:.4} crosstalk-free; key at T=0.2, beta=0.96: {:.4} -> {:.4}",
            pairwise_mutual_information(&mixed, &p, Quadrature::P).unwrap().1,
            d.search.objective,
            clean_mi,
            d.before.key_rate,
            d.after.key_rate
        );
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        4,
        "crosstalk recovery",
        min_recovery >= 0.95 && min_ratio > 3.0 && secs < 300.0,
        &format!(
            "min MI recovery {:.2}% (limit 95%); min after/before key ratio {min_ratio:.3} (limit > 3); {} seeds, 20 hops, {secs:.1} s",
            100.0 * min_recovery,
            seeds.len()
        ),
    );
}

/// Crosstalked synthetic fixtures shared by the finite-size and loss checks.
fn fixtures() -> Vec<(String, CovarianceState, ModePartition)> {
    let mut out = Vec::new();
    for (mode, tag) in [
        (CrosstalkMode::LocalOnly, "local"),
        (CrosstalkMode::Global, "global"),
    ] {
        for (db, strength, seed) in [(3.0, 0.3, 0u64), (6.0, 0.5, 1), (10.0, 0.4, 2)] {
            let spec = crosstalked(4, db, mode, strength, seed);
            out.push((
                format!("{tag} {db} dB strength {strength}"),
                simulate(&spec).unwrap(),
                spec.partition().unwrap(),
            ));
        }
    }
    out
}

#[test]
fn criterion_05_pessimistic_ordering() {
    let mut checked = 0;
    let mut violations = Vec::new();
    let (mut local_checked, mut local_bad) = (0, 0);
    for (name, state, p) in fixtures() {
        let local = name.starts_with("local");
        for t in [1.0, 0.5, 0.2, 0.05] {
            for beta in [0.96, 1.0] {
                let ch = ChannelSpec::Uniform(t);
                let k = |e| {
                    pessimistic_key_rate(&state, &p, &ch, beta, Quadrature::P, e)
                        .unwrap()
                        .key_rate
                };
                let inf = k(ErrorModel::Asymptotic);
                if inf <= 0.0 {
                    continue;
                }
                let ks: Vec<f64> = [5_000u64, 10_000, 40_000]
                    .iter()
                    .map(|&n| k(ErrorModel::finite(n).unwrap()))
                    .collect();
                checked += 1;
                local_checked += usize::from(local);
                if !(ks[0] <= ks[1] && ks[1] <= ks[2] && ks[2] <= inf) {
                    local_bad += usize::from(local);
                    violations.push(format!("{name}, T={t}, beta={beta}: {ks:?} vs {inf}"));
                }
            }
        }
    }
    for v in &violations {
        println!("    {v}");
    }
    let state = &fixtures()[0].1;
    let recovered = pessimistic_adjust(state, ErrorModel::Asymptotic);
    let limit_err = (recovered.matrix() - state.matrix()).abs().max();
    verdict(
        5,
        "pessimistic-error ordering",
        violations.is_empty() && checked > 0 && limit_err <= 1e-12,
        &format!(
            "K(5e3) <= K(1e4) <= K(4e4) <= K(inf) checked on {checked} configurations with K(inf) > 0: {} violations ({local_bad} of {local_checked} local-crosstalk, {} of {} global-crosstalk); N -> inf matrix error {limit_err:.1e}",
            violations.len(),
            violations.len() - local_bad,
            checked - local_checked
        ),
    );
}

#[test]
fn criterion_06_reported_arithmetic() {
    let eff = decoupling_efficiency(0.212, 0.163, 8).unwrap();
    let key_bound: f64 = 8.0 * 0.163;
    let mi_bound: f64 = 8.0 * 0.28;
    let mi_gap = mi_bound / 0.517;
    let key_gap = key_bound / 0.212;
    let mi_eff = decoupling_efficiency(0.517, 0.28, 8).unwrap();
    let pass = (eff - 0.1626).abs() <= 5e-4
        && (key_bound - 1.304).abs() <= 1e-12
        && (2.24f64 / 0.517 - 4.33).abs() <= 0.02
        && (mi_gap - 4.33).abs() <= 0.02
        && (1.304f64 / 0.212 - 6.15).abs() <= 0.02
        && (key_gap - 6.15).abs() <= 0.02
        && (mi_eff - 0.231).abs() <= 1e-3;
    verdict(
        6,
        "arithmetic consistency",
        pass,
        &format!(
            "efficiency {eff:.4}; 8 x 0.163 = {key_bound:.3}; 2.24/0.517 = {mi_gap:.3}; 1.304/0.212 = {key_gap:.3}; MI efficiency {mi_eff:.3}"
        ),
    );
}

#[test]
fn criterion_07_extrapolation() {
    let t = two_sided_t_quantile(0.95, 6.0).unwrap();
    let pts: Vec<(f64, f64)> = (1..=8)
        .map(|k| (k as f64, -0.0501 + 0.0293 * k as f64))
        .collect();
    let fit = linear_fit_prediction_bands(&pts, 0.95).unwrap();
    let widest = [1.0, 8.0, 25.0, 50.0]
        .iter()
        .map(|&x| fit.half_width(x))
        .fold(0.0, f64::max);
    let coef_err = (fit.intercept + 0.0501)
        .abs()
        .max((fit.slope - 0.0293).abs());
    verdict(
        7,
        "extrapolation machinery",
        (t - 2.447).abs() <= 1e-3 && widest <= 1e-12 && coef_err <= 1e-12 && (fit.t_quantile - t).abs() == 0.0,
        &format!("t(df=6, 95%) = {t:.4}; exact-line band half width {widest:.1e}; coefficient error {coef_err:.1e}"),
    );
}

/// Smallest loss on `[lo, hi]` where the raw key changes sign, by bisection.
fn bisect_cutoff(
    state: &CovarianceState,
    p: &ModePartition,
    beta: f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let raw = |db: f64| {
        loss_point(state, p, beta, Quadrature::P, db)
            .unwrap()
            .raw_key()
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if raw(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_08_loss_sweep() {
    let step = 1.0;
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * step).collect();
    let mut notes = Vec::new();
    let (mut monotone, mut ordered, mut interp_ok) = (true, true, true);
    let mut worst_interp: f64 = 0.0;
    let mut within = 0;
    for (name, state, p) in fixtures() {
        let config = OptimizerConfig {
            hops: 5,
            ..Default::default()
        };
        let processed =
            apply_network(&state, &p, &basin_hop(&state, &p, &config).unwrap().best).unwrap();
        for beta in [0.96, 0.5, 0.3] {
            let mut cut = Vec::new();
            for (s, proc) in [
                (&state, Processing::Original),
                (&processed, Processing::Decoupled),
            ] {
                let sw = loss_sweep(s, &p, beta, Quadrature::P, &grid, proc).unwrap();
                monotone &= sw.result.key_rates.windows(2).all(|w| w[1] <= w[0] + 1e-12);
                if let Cutoff::Within(c) = sw.cutoff {
                    within += 1;
                    let i = grid.iter().rposition(|&g| g <= c).unwrap();
                    let exact = bisect_cutoff(s, &p, beta, grid[i], grid[i + 1]);
                    worst_interp = worst_interp.max((c - exact).abs());
                    interp_ok &= (c - exact).abs() <= step;
                }
                cut.push(sw.cutoff);
            }
            let rank = |c: Cutoff| match c {
                Cutoff::NoKey => f64::NEG_INFINITY,
                Cutoff::Within(d) => d,
                Cutoff::BeyondGrid(_) => f64::INFINITY,
            };
            if rank(cut[1]) < rank(cut[0]) {
                ordered = false;
                notes.push(format!("{name}, beta={beta}: {:?} < {:?}", cut[1], cut[0]));
            }
        }
    }
    verdict(
        8,
        "loss-sweep properties",
        monotone && ordered && interp_ok && within > 0,
        &format!(
            "monotone: {monotone}; decoupled cutoff >= original: {ordered} {notes:?}; {within} interior cutoffs, max interpolation error {worst_interp:.3e} dB (limit {step} dB)"
        ),
    );
}

#[test]
fn criterion_09_gradient_check() {
    let spec = crosstalked(4, 3.0, CrosstalkMode::LocalOnly, 0.3, 9);
    let state = simulate(&spec).unwrap();
    let p = spec.partition().unwrap();
    let obj = MiObjective::new(&state, &p, &OptimizerConfig::default()).unwrap();
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let t: Vec<f64> = (0..obj.n_params())
            .map(|_| rng.gen_range(0.05..0.95))
            .collect();
        let g = obj.gradient_flat(&t).unwrap();
        let h = 1e-3;
        let reference: Vec<f64> = (0..t.len())
            .map(|i| {
                let at = |d: f64| {
                    let mut x = t.clone();
                    x[i] += d;
                    obj.value_flat(&x).unwrap()
                };
                (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
            })
            .collect();
        let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = g
            .iter()
            .zip(&reference)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err / scale);
    }
    verdict(
        9,
        "gradient check",
        worst <= 1e-4,
        &format!(
            "max |g_fd - g_ref|_inf / |g_ref|_inf = {worst:.3e} at 20 interior points (limit 1e-4)"
        ),
    );
}

fn cvmux(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_cvmux"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "cvmux {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Every file in `dir`, sorted by name, with its bytes.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_10_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    let mut sims = Vec::new();
    for run in ["sim_a", "sim_b"] {
        let dir = root.join(run);
        cvmux(&[
            "simulate",
            "--pairs",
            "4",
            "--squeezing-db",
            "3",
            "--crosstalk",
            "local",
            "--strength",
            "0.3",
            "--seed",
            "7",
            "--out",
            &s(&dir),
        ]);
        sims.push(snapshot(&dir));
    }
    let input = root.join("sim_a").join("simulated.json");
    let mut runs = Vec::new();
    for (run, jobs) in [("a", "1"), ("b", "4"), ("c", "1")] {
        let dec = root.join(format!("dec_{run}"));
        cvmux(&[
            "decouple",
            "--input",
            &s(&input),
            "--transmittance",
            "0.2",
            "--seed",
            "5",
            "--hops",
            "5",
            "--restarts",
            "4",
            "--jobs",
            jobs,
            "--out",
            &s(&dec),
        ]);
        let sw = root.join(format!("sweep_{run}"));
        cvmux(&[
            "sweep",
            "--input",
            &s(&input),
            "--transmittance",
            "0.2",
            "--seed",
            "5",
            "--hops",
            "3",
            "--restarts",
            "3",
            "--jobs",
            jobs,
            "--db-grid",
            "0:10:1",
            "--pessimistic-n",
            "5000",
            "--extrapolate",
            "25,50",
            "--plot-data",
            "--out",
            &s(&sw),
        ]);
        runs.push((snapshot(&dec), snapshot(&sw)));
    }
    let same_sim = sims[0] == sims[1];
    let same_runs = runs.windows(2).all(|w| w[0] == w[1]);
    let n_files = runs[0].0.len() + runs[0].1.len();
    verdict(
        10,
        "determinism",
        same_sim && same_runs,
        &format!(
            "simulate identical across runs: {same_sim}; decouple + sweep ({n_files} files) identical across runs and --jobs 1/4: {same_runs}"
        ),
    );
}
