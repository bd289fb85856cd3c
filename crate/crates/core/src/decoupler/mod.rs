//! Search for local beam-splitter networks that maximise the multimode
//! mutual information, undoing crosstalk between the multiplexed pairs.
//!
//! Each side applies a pairwise network to its own modes. Since such local
//! passive processing leaves Eve's Holevo information unchanged, maximising
//! the mutual information maximises the key. The search is a bounded
//! quasi-Newton ascent ([`local_optimize`]) wrapped in greedy basin hopping
//! ([`basin_hop`]).

mod basin;
pub mod lbfgsb;
mod objective;

pub use crate::gaussian::NetworkParams;
pub use basin::{
    aggregate_chains, basin_hop, basin_hop_from, decouple, finish_decouple, run_chain,
    BasinOutcome, ChainOutcome, Decoupled, HopRecord, HOLEVO_DRIFT_TOL,
};
pub use objective::{local_optimize, objective, LocalOutcome, MiObjective};

use alloc::format;

use crate::gaussian::Quadrature;
use crate::{Error, Result};

/// Which mutual information is maximised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ObjectiveKind {
    /// Sum over all pairs.
    #[default]
    TotalMi,
    /// A single pair, by index into the partition's pairing.
    SinglePairMi(usize),
}

/// Quadrature(s) entering the objective. `Sum` maximises `I_x + I_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ObjectiveQuadrature {
    X,
    #[default]
    P,
    Sum,
}

impl ObjectiveQuadrature {
    /// Quadrature used for the key once the network is fixed; `Sum` falls
    /// back to `p`.
    pub fn key_quadrature(self) -> Quadrature {
        match self {
            ObjectiveQuadrature::X => Quadrature::X,
            ObjectiveQuadrature::P | ObjectiveQuadrature::Sum => Quadrature::P,
        }
    }
}

impl From<Quadrature> for ObjectiveQuadrature {
    fn from(q: Quadrature) -> Self {
        match q {
            Quadrature::X => ObjectiveQuadrature::X,
            Quadrature::P => ObjectiveQuadrature::P,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct OptimizerConfig {
    pub objective: ObjectiveKind,
    pub quadrature: ObjectiveQuadrature,
    pub max_local_iterations: usize,
    /// Finite-difference step for the gradient.
    pub gradient_step: f64,
    /// Local search stops once the objective improves by less than this
    /// (relative to `max(1, |f|)`).
    pub convergence_tol: f64,
    /// Local searches per chain.
    pub hops: usize,
    /// Half-width of the uniform perturbation applied before each hop.
    pub hop_scale: f64,
    pub rng_seed: u64,
    /// Independent chains; each has its own RNG stream `(rng_seed, chain)`.
    pub parallel_restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            objective: ObjectiveKind::TotalMi,
            quadrature: ObjectiveQuadrature::P,
            max_local_iterations: 500,
            gradient_step: 1e-6,
            convergence_tol: 1e-10,
            hops: 20,
            hop_scale: 0.3,
            rng_seed: 0,
            parallel_restarts: 1,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::InvalidParameter(m));
        if !(self.hop_scale > 0.0 && self.hop_scale <= 1.0) {
            return bad(format!("hop_scale {} outside (0, 1]", self.hop_scale));
        }
        if !(self.gradient_step > 0.0 && self.gradient_step <= 1e-2) {
            return bad(format!(
                "gradient_step {} outside (0, 1e-2]",
                self.gradient_step
            ));
        }
        if !(self.convergence_tol >= 0.0) {
            return bad(format!(
                "convergence_tol {} must be >= 0",
                self.convergence_tol
            ));
        }
        if self.hops == 0 {
            return bad("hops must be at least 1".into());
        }
        if self.parallel_restarts == 0 {
            return bad("parallel_restarts must be at least 1".into());
        }
        Ok(())
    }
}
