//! Synthetic multimode entangled states with controlled squeezing, crosstalk
//! and excess noise, used as ground truth in place of measured data.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gaussian::network::{apply_side_strided, coupler_count};
use crate::gaussian::{CovarianceState, ModePartition};
use crate::{Error, Result};

/// How crosstalk couples the modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CrosstalkMode {
    /// Separate random networks on Alice's and on Bob's modes; exactly
    /// invertible by local processing.
    #[default]
    LocalOnly,
    /// One random network over all modes, coupling across the two parties.
    Global,
}

/// Recipe for a synthetic state: `n_pairs` two-mode squeezed vacua, Alice
/// holding modes `0..n_pairs`, Bob `n_pairs..2 n_pairs`, mode `k` paired
/// with `n_pairs + k`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SourceSpec {
    pub n_pairs: usize,
    /// Two-mode squeezing per pair in dB; a single value applies to all.
    pub squeezing_db: Vec<f64>,
    pub crosstalk_mode: CrosstalkMode,
    /// Each crosstalk coupler has `t = 1 − strength · u`, `u ~ U[0, 1)`.
    pub crosstalk_strength: f64,
    /// Noise added to the variances, per mode or a single value for all;
    /// empty means none.
    pub excess_noise: Vec<f64>,
    pub rng_seed: u64,
}

impl SourceSpec {
    pub fn uniform(n_pairs: usize, squeezing_db: f64) -> Self {
        Self {
            n_pairs,
            squeezing_db: alloc::vec![squeezing_db],
            crosstalk_mode: CrosstalkMode::LocalOnly,
            crosstalk_strength: 0.0,
            excess_noise: Vec::new(),
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::InvalidParameter("n_pairs must be at least 1".into()));
        }
        check_broadcast("squeezing_db", &self.squeezing_db, self.n_pairs, false)?;
        if self
            .squeezing_db
            .iter()
            .any(|&d| !(d >= 0.0) || !d.is_finite())
        {
            return Err(Error::InvalidParameter(
                "squeezing must be finite and >= 0 dB".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.crosstalk_strength) {
            return Err(Error::InvalidParameter(format!(
                "crosstalk strength {} outside [0, 1]",
                self.crosstalk_strength
            )));
        }
        check_broadcast("excess_noise", &self.excess_noise, 2 * self.n_pairs, true)?;
        if self
            .excess_noise
            .iter()
            .any(|&v| !(v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidParameter(
                "excess noise must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn partition(&self) -> Result<ModePartition> {
        ModePartition::halves(2 * self.n_pairs)
    }

    fn squeezing(&self, pair: usize) -> f64 {
        broadcast(&self.squeezing_db, pair)
    }
}

fn check_broadcast(name: &str, v: &[f64], n: usize, allow_empty: bool) -> Result<()> {
    match v.len() {
        0 if allow_empty => Ok(()),
        1 => Ok(()),
        l if l == n => Ok(()),
        l => Err(Error::Dimension(format!(
            "{name} has {l} entries, expected 1 or {n}"
        ))),
    }
}

fn broadcast(v: &[f64], k: usize) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        _ => v[k],
    }
}

/// Quadrature variance `cosh 2r` of a two-mode squeezed vacuum whose
/// squeezing is `db` decibels below shot noise (`e^{−2r} = 10^{−dB/10}`).
pub fn tmsv_variance(db: f64) -> f64 {
    let r = db * core::f64::consts::LN_10 / 20.0;
    libm::cosh(2.0 * r)
}

/// Direct sum of two-mode squeezed vacua: variance `V = cosh 2r`, x
/// correlation `+sinh 2r`, p correlation `−sinh 2r`.
pub fn generate_epr_array(spec: &SourceSpec) -> Result<CovarianceState> {
    spec.validate()?;
    let n = spec.n_pairs;
    let mut m = DMatrix::identity(4 * n, 4 * n);
    for k in 0..n {
        let v = tmsv_variance(spec.squeezing(k));
        let c = libm::sqrt(libm::fmax(v * v - 1.0, 0.0));
        let (a, b) = (k, n + k);
        for (q, sign) in [(0, 1.0), (1, -1.0)] {
            m[(2 * a + q, 2 * a + q)] = v;
            m[(2 * b + q, 2 * b + q)] = v;
            m[(2 * a + q, 2 * b + q)] = sign * c;
            m[(2 * b + q, 2 * a + q)] = sign * c;
        }
    }
    CovarianceState::new(m)
}

/// Adds the configured excess noise to both quadrature variances of each mode.
pub fn add_excess_noise(state: &CovarianceState, spec: &SourceSpec) -> Result<CovarianceState> {
    check_broadcast("excess_noise", &spec.excess_noise, state.n_modes(), true)?;
    if spec.excess_noise.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidParameter("excess noise must be >= 0".into()));
    }
    let mut out = state.clone();
    let m = out.matrix_mut();
    for k in 0..state.n_modes() {
        let v = broadcast(&spec.excess_noise, k);
        m[(2 * k, 2 * k)] += v;
        m[(2 * k + 1, 2 * k + 1)] += v;
    }
    Ok(out)
}

/// Random transmittances `1 − strength · u` for `count` couplers.
fn crosstalk_transmittances(rng: &mut ChaCha8Rng, count: usize, strength: f64) -> Vec<f64> {
    (0..count)
        .map(|_| 1.0 - strength * rng.gen::<f64>())
        .collect()
}

/// Applies seeded random passive crosstalk. Strength 0 returns the input
/// unchanged.
pub fn inject_crosstalk(state: &CovarianceState, spec: &SourceSpec) -> Result<CovarianceState> {
    if !(0.0..=1.0).contains(&spec.crosstalk_strength) {
        return Err(Error::InvalidParameter(format!(
            "crosstalk strength {} outside [0, 1]",
            spec.crosstalk_strength
        )));
    }
    if spec.crosstalk_strength == 0.0 {
        return Ok(state.clone());
    }
    let partition = ModePartition::halves(state.n_modes())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut out = state.clone();
    let m = out.matrix_mut();
    match spec.crosstalk_mode {
        CrosstalkMode::LocalOnly => {
            for side in [partition.alice(), partition.bob()] {
                let t = crosstalk_transmittances(
                    &mut rng,
                    coupler_count(side.len()),
                    spec.crosstalk_strength,
                );
                apply_side_strided(m, side, &t, 2);
            }
        }
        CrosstalkMode::Global => {
            let all: Vec<usize> = (0..state.n_modes()).collect();
            let t = crosstalk_transmittances(
                &mut rng,
                coupler_count(all.len()),
                spec.crosstalk_strength,
            );
            apply_side_strided(m, &all, &t, 2);
        }
    }
    Ok(out)
}

/// The network parameters [`inject_crosstalk`] uses in local-only mode, as
/// `(alice, bob)` transmittances.
pub fn local_crosstalk_params(spec: &SourceSpec) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let c = coupler_count(spec.n_pairs);
    let a = crosstalk_transmittances(&mut rng, c, spec.crosstalk_strength);
    let b = crosstalk_transmittances(&mut rng, c, spec.crosstalk_strength);
    (a, b)
}

/// EPR array, then excess noise, then crosstalk.
pub fn simulate(spec: &SourceSpec) -> Result<CovarianceState> {
    let s = generate_epr_array(spec)?;
    let s = add_excess_noise(&s, spec)?;
    inject_crosstalk(&s, spec)
}
