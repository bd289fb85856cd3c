use std::path::Path;

use cvmux_core::analysis::{
    default_db_grid, incremental_key_curve, linear_fit_prediction_bands, loss_point,
    loss_sweep_from_reports, rank_pairs, Cutoff, FitResult, LossSweep, Processing, RankedPair,
    SweepResult,
};
use cvmux_core::gaussian::{apply_network, restrict};
use cvmux_core::{ChannelSpec, CovarianceState, ErrorModel, ModePartition, Quadrature};
use serde::Serialize;

use super::load_valid;
use crate::config::{self, FileConfig, SweepArgs};
use crate::error::{AppError, AppResult};
use crate::io::{
    ensure_dir, fig2_left_rows, fig2_right_rows, fig3_rows, fit_rows, read_params, sweep_rows,
    write_csv, write_json, write_params, Fig2Right, FitRow, Provenance,
};
use crate::parallel;

#[derive(Serialize)]
struct RankEntry {
    pair: usize,
    alice: usize,
    bob: usize,
    key_rate: f64,
    raw_key: f64,
    mutual_information: f64,
    holevo: f64,
}

impl From<&RankedPair> for RankEntry {
    fn from(r: &RankedPair) -> Self {
        Self {
            pair: r.pair,
            alice: r.alice,
            bob: r.bob,
            key_rate: r.report.key_rate,
            raw_key: r.report.raw_key(),
            mutual_information: r.report.total_mi,
            holevo: r.report.holevo,
        }
    }
}

#[derive(Serialize)]
struct Labelled<T> {
    variant: String,
    #[serde(flatten)]
    value: T,
}

#[derive(Serialize)]
struct LabelledList<T> {
    variant: String,
    points: Vec<T>,
}

#[derive(Serialize)]
struct FitEntry {
    variant: String,
    fit: FitResult,
    predictions: Vec<FitRow>,
}

#[derive(Serialize)]
struct SweepOutput {
    provenance: Provenance,
    channel: ChannelSpec,
    beta: f64,
    beta_original: f64,
    quadrature: Quadrature,
    ranking: Vec<LabelledList<RankEntry>>,
    pairs: Vec<Labelled<SweepResult>>,
    fits: Vec<FitEntry>,
    loss: Vec<Labelled<LossSweep>>,
    extrapolated_loss: Vec<LabelledList<FitRow>>,
}

/// One processed or unprocessed state with the settings used for its curves.
struct Variant {
    processing: Processing,
    state: CovarianceState,
    beta: f64,
}

/// Key against loss for the given pairs of `state`, grid points in parallel.
fn loss_curve(
    state: &CovarianceState,
    partition: &ModePartition,
    pairs: &[usize],
    beta: f64,
    quadrature: Quadrature,
    grid: &[f64],
    processing: Processing,
) -> AppResult<LossSweep> {
    let (keep, sub) = partition.select_pairs(pairs)?;
    let reduced = restrict(state, &keep)?;
    let reports = parallel::try_map(grid, |&db| loss_point(&reduced, &sub, beta, quadrature, db))?;
    Ok(loss_sweep_from_reports(grid, &reports, processing)?)
}

pub fn run(args: &SweepArgs) -> AppResult<()> {
    let file = FileConfig::load(args.input.config.as_deref())?;
    let path = config::resolve_input(&args.input, &file)?;
    let (out, format) = config::resolve_out(&args.output, &file);
    let channel = config::resolve_channel(&args.key, &file)?;
    let beta = config::resolve_beta(args.key.beta, file.beta, 0.96)?;
    let beta_original = config::resolve_beta(args.beta_original, file.beta_original, beta)?;
    let quadrature = config::resolve_quadrature(&args.key, &file);
    let estimates = config::resolve_estimates(&args.key, &file)?;
    let (optimizer, jobs) = config::resolve_optimizer(&args.optimizer, quadrature, &file)?;
    let grid = args
        .db_grid
        .clone()
        .map(|g| g.0)
        .or_else(|| file.db_grid.clone())
        .unwrap_or_else(default_db_grid);
    cvmux_core::analysis::check_db_grid(&grid)?;
    let targets = args
        .extrapolate
        .clone()
        .or_else(|| file.extrapolate.clone())
        .unwrap_or_default();
    let confidence = args.confidence.or(file.confidence).unwrap_or(0.95);
    let plot_data = args.plot_data || file.plot_data.unwrap_or(false);
    let no_decouple = args.no_decouple || file.no_decouple.unwrap_or(false);
    let params_path = args.params.clone().or_else(|| file.params.clone());

    let input = load_valid(&path)?;
    let partition = config::resolve_partition(&args.input, &file, input.state.n_modes())?;
    channel.check_against(&partition)?;
    let n_pairs = partition.n_pairs();
    if !targets.is_empty() && n_pairs < 3 {
        return Err(AppError::Validation(format!(
            "extrapolation needs at least 3 pairs, the input has {n_pairs}"
        )));
    }

    let (output, used_params) = parallel::with_pool(jobs, || -> AppResult<_> {
        let mut variants = vec![Variant {
            processing: Processing::Original,
            state: input.state.clone(),
            beta: beta_original,
        }];
        let mut used_params = None;
        if !no_decouple {
            let params = match &params_path {
                Some(p) => read_params(p)?,
                None => parallel::basin_hop(&input.state, &partition, &optimizer)?.best,
            };
            variants.push(Variant {
                processing: Processing::Decoupled,
                state: apply_network(&input.state, &partition, &params)?,
                beta,
            });
            used_params = Some(params);
        }
        let mut doc = SweepOutput {
            provenance: {
                let mut p = Provenance::new("sweep", &path, &input.sha256);
                p.seed = (!no_decouple && params_path.is_none()).then_some(optimizer.rng_seed);
                p
            },
            channel: channel.clone(),
            beta,
            beta_original,
            quadrature,
            ranking: Vec::new(),
            pairs: Vec::new(),
            fits: Vec::new(),
            loss: Vec::new(),
            extrapolated_loss: Vec::new(),
        };
        let fit_xs: Vec<f64> = (1..=n_pairs)
            .map(|k| k as f64)
            .chain(targets.iter().copied())
            .collect();
        for v in &variants {
            let name = v.processing.name();
            let ranked = rank_pairs(&v.state, &partition, &channel, v.beta, quadrature)?;
            let order: Vec<usize> = ranked.iter().map(|r| r.pair).collect();
            doc.ranking.push(LabelledList {
                variant: name.into(),
                points: ranked.iter().map(RankEntry::from).collect(),
            });
            let curves = incremental_key_curve(
                &v.state,
                &partition,
                &channel,
                v.beta,
                quadrature,
                v.processing,
                &estimates,
            )?;
            for c in curves {
                if !targets.is_empty() && c.estimate == ErrorModel::Asymptotic {
                    let pts: Vec<(f64, f64)> = c
                        .axis
                        .iter()
                        .copied()
                        .zip(c.key_rates.iter().copied())
                        .collect();
                    let fit = linear_fit_prediction_bands(&pts, confidence)?;
                    let predictions = fit_rows(&[(c.variant_tag(), &fit)], &fit_xs);
                    doc.fits.push(FitEntry {
                        variant: c.variant_tag(),
                        fit,
                        predictions,
                    });
                }
                doc.pairs.push(Labelled {
                    variant: c.variant_tag(),
                    value: c,
                });
            }

            // Loss curves: all pairs, and for the processed state each top-k subset.
            let ks: Vec<usize> = match v.processing {
                Processing::Original => vec![n_pairs],
                Processing::Decoupled => (1..=n_pairs).collect(),
            };
            let curves = ks
                .iter()
                .map(|&k| {
                    loss_curve(
                        &v.state,
                        &partition,
                        &order[..k],
                        v.beta,
                        quadrature,
                        &grid,
                        v.processing,
                    )
                })
                .collect::<AppResult<Vec<_>>>()?;
            if !targets.is_empty() && v.processing == Processing::Decoupled {
                for &x in &targets {
                    let rows = grid
                        .iter()
                        .enumerate()
                        .map(|(i, &db)| {
                            let pts: Vec<(f64, f64)> = curves
                                .iter()
                                .enumerate()
                                .map(|(k, c)| ((k + 1) as f64, c.result.key_rates[i]))
                                .collect();
                            let fit = linear_fit_prediction_bands(&pts, confidence)?;
                            let (lower, upper) = fit.band(x);
                            Ok(FitRow {
                                variant: format!("{name}_extrapolated_{x}"),
                                x: db,
                                predicted: fit.predict(x),
                                lower,
                                upper,
                            })
                        })
                        .collect::<cvmux_core::Result<Vec<_>>>()?;
                    doc.extrapolated_loss.push(LabelledList {
                        variant: format!("{name}_extrapolated_{x}"),
                        points: rows,
                    });
                }
            }
            for (k, c) in ks.iter().zip(curves) {
                let label = if *k == n_pairs {
                    name.to_string()
                } else {
                    format!("{name}_k{k}")
                };
                log_cutoff(&label, c.cutoff);
                doc.loss.push(Labelled {
                    variant: label,
                    value: c,
                });
            }
        }
        Ok((doc, used_params))
    })??;

    ensure_dir(&out)?;
    if let Some(p) = &used_params {
        write_params(&out.join("params.json"), p)?;
    }
    emit(&out, format, plot_data, &output, &targets, n_pairs)
}

fn log_cutoff(label: &str, c: Cutoff) {
    match c {
        Cutoff::NoKey => println!("{label}: no key on the loss grid"),
        Cutoff::Within(db) => println!("{label}: key vanishes at {db:.3} dB"),
        Cutoff::BeyondGrid(db) => println!("{label}: key still positive at {db} dB"),
    }
}

fn emit(
    out: &Path,
    format: config::Format,
    plot_data: bool,
    doc: &SweepOutput,
    targets: &[f64],
    n_pairs: usize,
) -> AppResult<()> {
    let pair_curves: Vec<(String, &SweepResult)> = doc
        .pairs
        .iter()
        .map(|l| (l.variant.clone(), &l.value))
        .collect();
    let loss_curves: Vec<(String, &SweepResult)> = doc
        .loss
        .iter()
        .map(|l| (l.variant.clone(), &l.value.result))
        .collect();
    if format.json() {
        write_json(&out.join("sweep.json"), doc)?;
    }
    if format.csv() {
        let mut rows = sweep_rows(&pair_curves);
        rows.extend(sweep_rows(&loss_curves));
        write_csv(&out.join("sweep.csv"), &rows)?;
        if !doc.fits.is_empty() {
            let rows: Vec<&FitRow> = doc.fits.iter().flat_map(|f| &f.predictions).collect();
            write_csv(&out.join("fit.csv"), &rows)?;
        }
    }
    if plot_data {
        let fits: Vec<(String, &FitResult)> = doc
            .fits
            .iter()
            .map(|f| (f.variant.clone(), &f.fit))
            .collect();
        let fit_xs: Vec<f64> = (1..=n_pairs)
            .map(|k| k as f64)
            .chain(targets.iter().copied())
            .collect();
        write_csv(
            &out.join("fig2_left.csv"),
            &fig2_left_rows(&pair_curves, &fits, &fit_xs),
        )?;
        let asymptotic: Vec<(String, &SweepResult)> = pair_curves
            .iter()
            .filter(|(_, s)| s.estimate == ErrorModel::Asymptotic)
            .cloned()
            .collect();
        write_csv(
            &out.join("fig2_right_mi.csv"),
            &fig2_right_rows(&asymptotic, Fig2Right::MutualInformation),
        )?;
        write_csv(
            &out.join("fig2_right_holevo.csv"),
            &fig2_right_rows(&asymptotic, Fig2Right::Holevo),
        )?;
        let extrapolated: Vec<(String, Vec<crate::io::BandPoint>)> = doc
            .extrapolated_loss
            .iter()
            .map(|l| {
                (
                    l.variant.clone(),
                    l.points
                        .iter()
                        .map(|r| (r.x, r.predicted, r.lower, r.upper))
                        .collect(),
                )
            })
            .collect();
        write_csv(
            &out.join("fig3.csv"),
            &fig3_rows(&loss_curves, &extrapolated),
        )?;
    }
    Ok(())
}
