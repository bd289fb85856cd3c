use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the numerical core can report.
///
/// Variants split into input problems (bad dimensions, indices or parameter
/// values) and numerical problems (unphysical spectra, solver failures). The
/// command line maps the first group to exit code 2 and the second to 1; see
/// [`Error::is_numerical`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("mode index {index} out of range for a {n_modes}-mode state")]
    ModeIndex { index: usize, n_modes: usize },

    #[error("invalid mode partition: {0}")]
    Partition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unphysical state in {context}: symplectic eigenvalue {eigenvalue} < 1")]
    Unphysical { context: String, eigenvalue: f64 },

    #[error("eigen-decomposition failed for a {dim}x{dim} matrix (diagonal range {min_diag:e}..{max_diag:e})")]
    EigenSolver {
        dim: usize,
        min_diag: f64,
        max_diag: f64,
    },

    #[error("non-positive variance {variance} on mode {mode}")]
    NonPositiveVariance { mode: usize, variance: f64 },

    #[error("non-physical correlation in pair {pair}: C^2 = {c2} >= V_A V_B = {vavb}")]
    Correlation { pair: usize, c2: f64, vavb: f64 },

    #[error("negative Holevo quantity {0}; numerical or modelling fault")]
    NegativeHolevo(f64),

    #[error("non-finite objective value at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("Holevo bound drifted by {0:e} under local processing")]
    HolevoDrift(f64),

    #[error("every basin-hopping restart failed: {}", .0.join("; "))]
    AllRestartsFailed(Vec<String>),

    #[error("degenerate regression input: {0}")]
    DegenerateFit(String),
}

impl Error {
    /// `true` for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Unphysical { .. }
                | Error::EigenSolver { .. }
                | Error::Correlation { .. }
                | Error::NonPositiveVariance { .. }
                | Error::NegativeHolevo(_)
                | Error::NonFinite { .. }
                | Error::HolevoDrift(_)
                | Error::AllRestartsFailed(_)
        )
    }
}
