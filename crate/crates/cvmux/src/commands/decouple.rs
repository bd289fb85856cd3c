use cvmux_core::decoupler::{finish_decouple, HopRecord, OptimizerConfig};
use cvmux_core::{KeyRateReport, ModePartition};
use serde::Serialize;

use super::{load_valid, LabelledReport};
use crate::config::{self, DecoupleArgs, FileConfig};
use crate::error::AppResult;
use crate::io::{
    ensure_dir, write_covariance, write_json, write_params, write_report_csv, Provenance,
};
use crate::parallel;

#[derive(Serialize)]
struct SearchSummary<'a> {
    objective: f64,
    chain: usize,
    trace: &'a [HopRecord],
}

#[derive(Serialize)]
struct DecoupleOutput<'a> {
    provenance: Provenance,
    partition: &'a ModePartition,
    optimizer: &'a OptimizerConfig,
    before: LabelledReport<'a>,
    after: LabelledReport<'a>,
    key_ratio: f64,
    mi_ratio: f64,
    holevo_drift: f64,
    search: SearchSummary<'a>,
}

pub fn run(args: &DecoupleArgs) -> AppResult<()> {
    let file = FileConfig::load(args.input.config.as_deref())?;
    let path = config::resolve_input(&args.input, &file)?;
    let (out, format) = config::resolve_out(&args.output, &file);
    let channel = config::resolve_channel(&args.key, &file)?;
    let beta = config::resolve_beta(args.key.beta, file.beta, 0.96)?;
    let quadrature = config::resolve_quadrature(&args.key, &file);
    let (optimizer, jobs) = config::resolve_optimizer(&args.optimizer, quadrature, &file)?;

    let input = load_valid(&path)?;
    let partition = config::resolve_partition(&args.input, &file, input.state.n_modes())?;
    channel.check_against(&partition)?;
    let search = parallel::with_pool(jobs, || {
        parallel::basin_hop(&input.state, &partition, &optimizer)
    })??;
    let d = finish_decouple(&input.state, &partition, &channel, beta, &optimizer, search)?;

    println!(
        "key {:.6e} -> {:.6e} bits/use, ratio {}; mutual information {:.6e} -> {:.6e}",
        d.before.key_rate,
        d.after.key_rate,
        d.key_ratio(),
        d.before.total_mi,
        d.after.total_mi
    );
    ensure_dir(&out)?;
    write_params(&out.join("params.json"), &d.params)?;
    write_covariance(&out.join("decoupled.json"), &d.state, input.ordering)?;
    let labelled: [(String, &KeyRateReport); 2] =
        [("before".into(), &d.before), ("after".into(), &d.after)];
    if format.json() {
        let mut provenance = Provenance::new("decouple", &path, &input.sha256);
        provenance.seed = Some(optimizer.rng_seed);
        let doc = DecoupleOutput {
            provenance,
            partition: &partition,
            optimizer: &optimizer,
            before: LabelledReport::new("before".into(), &d.before),
            after: LabelledReport::new("after".into(), &d.after),
            key_ratio: d.key_ratio(),
            mi_ratio: d.mi_ratio(),
            holevo_drift: (d.after.holevo - d.before.holevo).abs(),
            search: SearchSummary {
                objective: d.search.objective,
                chain: d.search.chain,
                trace: &d.search.trace,
            },
        };
        write_json(&out.join("decouple.json"), &doc)?;
    }
    if format.csv() {
        write_report_csv(&out.join("decouple.csv"), &partition, &labelled)?;
    }
    Ok(())
}
