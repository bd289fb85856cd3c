mod analyze;
mod decouple;
mod simulate;
mod sweep;
mod validate;

pub use analyze::run as analyze;
pub use decouple::run as decouple;
pub use simulate::run as simulate;
pub use sweep::run as sweep;
pub use validate::run as validate;

use std::path::Path;

use cvmux_core::gaussian::{validate as check, DEFAULT_PHYSICALITY_TOL};
use cvmux_core::security::ErrorModel;
use cvmux_core::KeyRateReport;
use serde::Serialize;

use crate::error::{AppError, AppResult};
use crate::io::{read_covariance, CovarianceInput};

/// Reads a covariance file and rejects it unless it is symmetric and
/// physical.
fn load_valid(path: &Path) -> AppResult<CovarianceInput> {
    let input = read_covariance(path)?;
    let report = check(&input.state, DEFAULT_PHYSICALITY_TOL);
    for w in &report.warnings {
        log::warn!("{}: {w}", path.display());
    }
    if !report.passed() {
        return Err(AppError::Validation(format!(
            "{}: invalid covariance matrix: {:?}",
            path.display(),
            report.violations
        )));
    }
    Ok(input)
}

fn estimate_label(e: ErrorModel) -> String {
    match e {
        ErrorModel::Asymptotic => "asymptotic".into(),
        ErrorModel::Finite { n_samples } => format!("n{n_samples}"),
    }
}

/// A report tagged with its configuration, as written to JSON.
#[derive(Debug, Serialize)]
struct LabelledReport<'a> {
    configuration: String,
    #[serde(flatten)]
    report: &'a KeyRateReport,
    raw_key: f64,
}

impl<'a> LabelledReport<'a> {
    fn new(configuration: String, report: &'a KeyRateReport) -> Self {
        Self {
            configuration,
            report,
            raw_key: report.raw_key(),
        }
    }
}
