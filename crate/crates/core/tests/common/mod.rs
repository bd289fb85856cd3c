#![allow(dead_code)]

pub mod oracle;

use cvmux_core::gaussian::apply_beamsplitter;
use cvmux_core::CovarianceState;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Product of squeezed thermal modes scrambled by a random passive network
/// over all modes, so every mode ends up correlated with every other.
pub fn random_state(n_modes: usize, seed: u64) -> CovarianceState {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        let nu: f64 = rng.gen_range(1.0..3.0);
        let s: f64 = rng.gen_range(-0.8..0.8);
        m[(2 * k, 2 * k)] = nu * (2.0 * s).exp();
        m[(2 * k + 1, 2 * k + 1)] = nu * (-2.0 * s).exp();
    }
    let mut state = CovarianceState::new(m).unwrap();
    for _ in 0..3 * n_modes {
        let i = rng.gen_range(0..n_modes);
        let j = (i + rng.gen_range(1..n_modes)) % n_modes;
        state = apply_beamsplitter(&state, i.min(j), i.max(j), rng.gen()).unwrap();
    }
    state
}

/// Block-diagonal direct sum.
pub fn direct_sum(a: &CovarianceState, b: &CovarianceState) -> CovarianceState {
    let (na, nb) = (a.matrix().nrows(), b.matrix().nrows());
    let mut m = DMatrix::zeros(na + nb, na + nb);
    m.view_mut((0, 0), (na, na)).copy_from(a.matrix());
    m.view_mut((na, na), (nb, nb)).copy_from(b.matrix());
    CovarianceState::new(m).unwrap()
}

pub fn random_transmittances(count: usize, rng: &mut StdRng) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(0.0..=1.0)).collect()
}
