use cvmux_core::security::pessimistic_key_rate;
use cvmux_core::{KeyRateReport, ModePartition};
use serde::Serialize;

use super::{estimate_label, load_valid, LabelledReport};
use crate::config::{self, AnalyzeArgs, FileConfig};
use crate::error::AppResult;
use crate::io::{ensure_dir, write_json, write_report_csv, Provenance};

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    provenance: Provenance,
    partition: &'a ModePartition,
    reports: Vec<LabelledReport<'a>>,
}

pub fn run(args: &AnalyzeArgs) -> AppResult<()> {
    let file = FileConfig::load(args.input.config.as_deref())?;
    let path = config::resolve_input(&args.input, &file)?;
    let (out, format) = config::resolve_out(&args.output, &file);
    let channel = config::resolve_channel(&args.key, &file)?;
    let beta = config::resolve_beta(args.key.beta, file.beta, 0.96)?;
    let quadrature = config::resolve_quadrature(&args.key, &file);
    let estimates = config::resolve_estimates(&args.key, &file)?;

    let input = load_valid(&path)?;
    let partition = config::resolve_partition(&args.input, &file, input.state.n_modes())?;
    let reports = estimates
        .iter()
        .map(|&e| {
            let r = pessimistic_key_rate(&input.state, &partition, &channel, beta, quadrature, e)?;
            Ok((estimate_label(e), r))
        })
        .collect::<cvmux_core::Result<Vec<(String, KeyRateReport)>>>()?;

    for (label, r) in &reports {
        println!(
            "{label}: key {:.6e} bits/use (I = {:.6e}, chi = {:.6e}, beta = {beta})",
            r.key_rate, r.total_mi, r.holevo
        );
    }
    ensure_dir(&out)?;
    if format.json() {
        let doc = AnalyzeOutput {
            provenance: Provenance::new("analyze", &path, &input.sha256),
            partition: &partition,
            reports: reports
                .iter()
                .map(|(l, r)| LabelledReport::new(l.clone(), r))
                .collect(),
        };
        write_json(&out.join("analyze.json"), &doc)?;
    }
    if format.csv() {
        let rows: Vec<_> = reports.iter().map(|(l, r)| (l.clone(), r)).collect();
        write_report_csv(&out.join("analyze.csv"), &partition, &rows)?;
    }
    Ok(())
}
