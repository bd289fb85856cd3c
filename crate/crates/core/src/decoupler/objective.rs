use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::lbfgsb::{minimize_in_box, BoxMinimizerOptions, BoxProblem};
use super::{ObjectiveKind, ObjectiveQuadrature, OptimizerConfig};
use crate::gaussian::network::{apply_side_strided, coupler_count};
use crate::gaussian::{CovarianceState, ModePartition, NetworkParams, Quadrature};
use crate::security::pair_information;
use crate::{Error, Result};

/// Mutual information of the locally processed state as a function of the
/// flat transmittance vector.
///
/// A passive network with real transmittances acts identically on the x and
/// p quadratures, so only the `N × N` block(s) of the quadrature(s) in use
/// are transformed.
#[derive(Debug, Clone)]
pub struct MiObjective {
    partition: ModePartition,
    blocks: Vec<(Quadrature, DMatrix<f64>)>,
    kind: ObjectiveKind,
    step: f64,
    n_alice: usize,
    n_params: usize,
}

impl MiObjective {
    pub fn new(
        state: &CovarianceState,
        partition: &ModePartition,
        config: &OptimizerConfig,
    ) -> Result<Self> {
        partition.check_against(state.n_modes())?;
        if let ObjectiveKind::SinglePairMi(k) = config.objective {
            if k >= partition.n_pairs() {
                return Err(Error::InvalidParameter(format!(
                    "pair {k} requested, partition has {} pairs",
                    partition.n_pairs()
                )));
            }
        }
        let quads: &[Quadrature] = match config.quadrature {
            ObjectiveQuadrature::X => &[Quadrature::X],
            ObjectiveQuadrature::P => &[Quadrature::P],
            ObjectiveQuadrature::Sum => &[Quadrature::X, Quadrature::P],
        };
        let n = state.n_modes();
        let blocks = quads
            .iter()
            .map(|&q| (q, DMatrix::from_fn(n, n, |r, c| state.entry(q, r, c))))
            .collect();
        let n_alice = coupler_count(partition.alice().len());
        Ok(Self {
            partition: partition.clone(),
            blocks,
            kind: config.objective,
            step: config.gradient_step,
            n_alice,
            n_params: n_alice + coupler_count(partition.bob().len()),
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn partition(&self) -> &ModePartition {
        &self.partition
    }

    pub fn value(&self, params: &NetworkParams) -> Result<f64> {
        params.matches(&self.partition)?;
        self.value_flat(&params.to_flat())
    }

    pub fn value_flat(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.n_params {
            return Err(Error::Dimension(format!(
                "{} parameters, expected {}",
                t.len(),
                self.n_params
            )));
        }
        let (ta, tb) = t.split_at(self.n_alice);
        let mut total = 0.0;
        for (_, block) in &self.blocks {
            let mut m = block.clone();
            apply_side_strided(&mut m, self.partition.alice(), ta, 1);
            apply_side_strided(&mut m, self.partition.bob(), tb, 1);
            let pairs = self.partition.pairing();
            let info = |k: usize| {
                let (a, b) = pairs[k];
                pair_information(k, a, b, m[(a, a)], m[(b, b)], m[(a, b)])
            };
            total += match self.kind {
                ObjectiveKind::TotalMi => {
                    let mut s = 0.0;
                    for k in 0..pairs.len() {
                        s += info(k)?;
                    }
                    s
                }
                ObjectiveKind::SinglePairMi(k) => info(k)?,
            };
        }
        Ok(total)
    }

    /// Central finite-difference gradient with the configured step.
    pub fn gradient_flat(&self, t: &[f64]) -> Result<Vec<f64>> {
        self.gradient_with_step(t, self.step)
    }

    /// Finite-difference gradient with step `h`. Coordinates within `h` of
    /// a bound use a one-sided difference that stays inside `[0, 1]`.
    pub fn gradient_with_step(&self, t: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut x = t.to_vec();
        let f0 = self.value_flat(t)?;
        let mut grad = Vec::with_capacity(t.len());
        for i in 0..t.len() {
            let xi = t[i];
            let d = if xi - h >= 0.0 && xi + h <= 1.0 {
                x[i] = xi + h;
                let up = self.value_flat(&x)?;
                x[i] = xi - h;
                let down = self.value_flat(&x)?;
                (up - down) / (2.0 * h)
            } else if xi + h <= 1.0 {
                x[i] = xi + h;
                (self.value_flat(&x)? - f0) / h
            } else {
                x[i] = xi - h;
                (f0 - self.value_flat(&x)?) / h
            };
            x[i] = xi;
            grad.push(d);
        }
        Ok(grad)
    }
}

struct Negated<'a>(&'a MiObjective);

impl BoxProblem for Negated<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.0.value_flat(x)?)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.0.gradient_flat(x)?;
        for v in g.iter_mut() {
            *v = -*v;
        }
        Ok(g)
    }
}

/// Result of one bounded quasi-Newton ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOutcome {
    pub params: NetworkParams,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Objective value of the network `params` applied to `state`.
pub fn objective(
    params: &NetworkParams,
    state: &CovarianceState,
    partition: &ModePartition,
    config: &OptimizerConfig,
) -> Result<f64> {
    MiObjective::new(state, partition, config)?.value(params)
}

/// Bounded quasi-Newton ascent of the objective from `init`.
pub fn local_optimize(
    state: &CovarianceState,
    partition: &ModePartition,
    init: &NetworkParams,
    config: &OptimizerConfig,
) -> Result<LocalOutcome> {
    config.validate()?;
    init.matches(partition)?;
    let obj = MiObjective::new(state, partition, config)?;
    local_optimize_flat(&obj, &init.to_flat(), config)
}

pub(crate) fn local_optimize_flat(
    obj: &MiObjective,
    init: &[f64],
    config: &OptimizerConfig,
) -> Result<LocalOutcome> {
    let opts = BoxMinimizerOptions {
        max_iterations: config.max_local_iterations,
        ftol: config.convergence_tol,
        ..BoxMinimizerOptions::default()
    };
    let min = minimize_in_box(&Negated(obj), init, 0.0, 1.0, &opts)?;
    Ok(LocalOutcome {
        params: NetworkParams::from_flat(obj.partition(), &min.x)?,
        objective: -min.value,
        iterations: min.iterations,
        converged: min.converged,
    })
}
