use std::path::Path;

use cvmux_core::{KeyRateReport, ModePartition};
use serde::Serialize;

use super::write_csv;
use crate::error::AppResult;

/// Where a result came from: enough to rerun it.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub input: String,
    pub input_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(command: &str, input: &Path, input_sha256: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            input: input.display().to_string(),
            input_sha256: input_sha256.into(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub configuration: String,
    pub n_samples: Option<u64>,
    pub quadrature: &'static str,
    pub beta: f64,
    pub pair: usize,
    pub alice_mode: usize,
    pub bob_mode: usize,
    pub mutual_information: f64,
    pub total_mi: f64,
    pub holevo: f64,
    pub key_rate: f64,
}

/// One row per pair of each labelled report.
pub fn report_rows(
    partition: &ModePartition,
    reports: &[(String, &KeyRateReport)],
) -> Vec<ReportRow> {
    reports
        .iter()
        .flat_map(|(label, r)| {
            r.per_pair_mi
                .iter()
                .zip(partition.pairing())
                .enumerate()
                .map(move |(k, (&mi, &(a, b)))| ReportRow {
                    configuration: label.clone(),
                    n_samples: r.n_samples,
                    quadrature: r.quadrature.name(),
                    beta: r.beta,
                    pair: k,
                    alice_mode: a,
                    bob_mode: b,
                    mutual_information: mi,
                    total_mi: r.total_mi,
                    holevo: r.holevo,
                    key_rate: r.key_rate,
                })
        })
        .collect()
}

pub fn write_report_csv(
    path: &Path,
    partition: &ModePartition,
    reports: &[(String, &KeyRateReport)],
) -> AppResult<()> {
    write_csv(path, &report_rows(partition, reports))
}
