use cvmux_core::gaussian::{validate, DEFAULT_PHYSICALITY_TOL};
use serde::Serialize;

use crate::config::{self, FileConfig, ValidateArgs};
use crate::error::{AppError, AppResult};
use crate::io::{ensure_dir, read_covariance, write_json, Provenance};

#[derive(Serialize)]
struct ValidateOutput<'a> {
    provenance: Provenance,
    n_modes: usize,
    tolerance: f64,
    passed: bool,
    report: &'a cvmux_core::gaussian::ValidationReport,
}

pub fn run(args: &ValidateArgs) -> AppResult<()> {
    let file = FileConfig::load(args.input.config.as_deref())?;
    let path = config::resolve_input(&args.input, &file)?;
    let tolerance = args
        .tolerance
        .or(file.tolerance)
        .unwrap_or(DEFAULT_PHYSICALITY_TOL);
    if !(tolerance >= 0.0) {
        return Err(AppError::Validation(format!(
            "tolerance {tolerance} must be >= 0"
        )));
    }
    let input = read_covariance(&path)?;
    let report = validate(&input.state, tolerance);
    let doc = ValidateOutput {
        provenance: Provenance::new("validate", &path, &input.sha256),
        n_modes: input.state.n_modes(),
        tolerance,
        passed: report.passed(),
        report: &report,
    };
    let text = serde_json::to_string_pretty(&doc).expect("report serializes");
    println!("{text}");
    if let Some(out) = args.out.clone().or_else(|| file.out.clone()) {
        ensure_dir(&out)?;
        write_json(&out.join("validation.json"), &doc)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(AppError::Validation(format!(
            "{}: {:?}",
            path.display(),
            report.violations
        )))
    }
}
