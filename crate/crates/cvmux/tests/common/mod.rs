#![allow(dead_code)]

#[path = "../../../core/tests/common/oracle.rs"]
pub mod oracle;

use cvmux_core::gaussian::apply_beamsplitter;
use cvmux_core::CovarianceState;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Squeezed thermal modes mixed by a random passive network over all modes.
pub fn random_state(n_modes: usize, seed: u64) -> CovarianceState {
    let mut rng = StdRng::seed_from_u64(seed);
    let dim = 2 * n_modes;
    let mut data = vec![0.0; dim * dim];
    for k in 0..n_modes {
        let nu: f64 = rng.gen_range(1.0..3.0);
        let s: f64 = rng.gen_range(-0.8..0.8);
        data[(2 * k) * dim + 2 * k] = nu * (2.0 * s).exp();
        data[(2 * k + 1) * dim + 2 * k + 1] = nu * (-2.0 * s).exp();
    }
    let mut state = CovarianceState::from_row_major(n_modes, &data).unwrap();
    for _ in 0..3 * n_modes {
        let i = rng.gen_range(0..n_modes);
        let j = (i + rng.gen_range(1..n_modes)) % n_modes;
        state = apply_beamsplitter(&state, i.min(j), i.max(j), rng.gen()).unwrap();
    }
    state
}

pub fn random_unit(count: usize, rng: &mut StdRng) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(0.0..=1.0)).collect()
}

/// Prints the one-line verdict and fails the test on FAIL.
pub fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "{} [{id}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}
