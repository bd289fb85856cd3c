//! Command-line arguments, the optional JSON config file, and their merge
//! (flags win over file values).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvmux_core::decoupler::{ObjectiveKind, ObjectiveQuadrature, OptimizerConfig};
use cvmux_core::source::CrosstalkMode;
use cvmux_core::{ChannelSpec, ErrorModel, ModePartition, Quadrature};
use serde::Deserialize;

use crate::error::{AppError, AppResult};
use crate::io::{parse_json, read_bytes, Ordering};

#[derive(Debug, Parser)]
#[command(
    name = "cvmux",
    version,
    about = "Key-rate analysis and crosstalk decoupling for multiplexed CV-QKD"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key rate of a covariance matrix, optionally with finite-size estimates.
    Analyze(AnalyzeArgs),
    /// Optimise local beam-splitter networks and report the key before and after.
    Decouple(DecoupleArgs),
    /// Key against number of pairs and against channel loss.
    Sweep(SweepArgs),
    /// Generate a synthetic multimode entangled state.
    Simulate(SimulateArgs),
    /// Check symmetry and physicality of a covariance matrix.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureArg {
    X,
    P,
}

impl From<QuadratureArg> for Quadrature {
    fn from(q: QuadratureArg) -> Self {
        match q {
            QuadratureArg::X => Quadrature::X,
            QuadratureArg::P => Quadrature::P,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveQuadratureArg {
    X,
    P,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Alice holds the first half, mode k pairs with n/2 + k.
    #[default]
    Halves,
    /// Alice holds the first half, mode k pairs with n − 1 − k.
    Mirrored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingArg {
    Interleaved,
    XxPpBlocks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrosstalkArg {
    Local,
    Global,
}

fn parse_objective(s: &str) -> Result<ObjectiveKind, String> {
    if s == "total" {
        return Ok(ObjectiveKind::TotalMi);
    }
    match s.strip_prefix("pair:").map(str::parse) {
        Some(Ok(k)) => Ok(ObjectiveKind::SinglePairMi(k)),
        _ => Err(format!("expected `total` or `pair:K`, got {s:?}")),
    }
}

/// Loss grid in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct DbGrid(pub Vec<f64>);

/// `start:stop:step` in dB, inclusive of `stop` up to rounding.
fn parse_db_grid(s: &str) -> Result<DbGrid, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return Err("expected start:stop:step".into());
    };
    if !(step > 0.0) || !(stop >= start) {
        return Err("need step > 0 and stop >= start".into());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok(DbGrid((0..=n).map(|k| start + k as f64 * step).collect()))
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Covariance matrix JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON file supplying any option; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Mode pairing between Alice (first half) and Bob (second half).
    #[arg(long, value_enum)]
    pub pairing: Option<Pairing>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct KeyArgs {
    /// Channel transmittance in [0, 1] applied to every Bob mode.
    #[arg(long)]
    pub transmittance: Option<f64>,
    /// Channel loss in dB applied to every Bob mode.
    #[arg(long)]
    pub loss_db: Option<f64>,
    /// Reconciliation efficiency in (0, 1].
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub quadrature: Option<QuadratureArg>,
    /// Sample counts for pessimistic finite-size reports.
    #[arg(long, value_delimiter = ',')]
    pub pessimistic_n: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// `total` or `pair:K`.
    #[arg(long, value_parser = parse_objective)]
    pub objective: Option<ObjectiveKind>,
    /// Quadrature(s) whose mutual information is maximised; with `sum` the
    /// key is reported in p.
    #[arg(long, value_enum)]
    pub objective_quadrature: Option<ObjectiveQuadratureArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hops: Option<usize>,
    #[arg(long)]
    pub hop_scale: Option<f64>,
    /// Independent basin-hopping chains.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub key: KeyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DecoupleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub key: KeyArgs,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub key: KeyArgs,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Reconciliation efficiency for the unprocessed curves (default: --beta).
    #[arg(long)]
    pub beta_original: Option<f64>,
    /// Use these network parameters instead of optimising.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Only the unprocessed curves.
    #[arg(long)]
    pub no_decouple: bool,
    /// Loss grid `start:stop:step` in dB.
    #[arg(long, value_parser = parse_db_grid)]
    pub db_grid: Option<DbGrid>,
    /// Extrapolate the key to these numbers of pairs.
    #[arg(long, value_delimiter = ',')]
    pub extrapolate: Option<Vec<f64>>,
    /// Two-sided confidence of the prediction bands.
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Also write fig2_left.csv, fig2_right_mi.csv, fig2_right_holevo.csv, fig3.csv.
    #[arg(long)]
    pub plot_data: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Two-mode squeezing in dB, one value or one per pair.
    #[arg(long, value_delimiter = ',')]
    pub squeezing_db: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub crosstalk: Option<CrosstalkArg>,
    #[arg(long)]
    pub strength: Option<f64>,
    /// Added variance, one value or one per mode.
    #[arg(long, value_delimiter = ',')]
    pub excess_noise: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Base name of the written files.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, value_enum)]
    pub ordering: Option<OrderingArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Tolerated shortfall of the smallest symplectic eigenvalue below 1.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Every option that may come from a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub pairing: Option<Pairing>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub transmittance: Option<f64>,
    pub loss_db: Option<f64>,
    pub transmittance_per_mode: Option<Vec<f64>>,
    pub loss_db_per_mode: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub beta_original: Option<f64>,
    pub quadrature: Option<QuadratureArg>,
    pub pessimistic_n: Option<Vec<u64>>,
    pub objective: Option<String>,
    pub objective_quadrature: Option<ObjectiveQuadratureArg>,
    pub seed: Option<u64>,
    pub hops: Option<usize>,
    pub hop_scale: Option<f64>,
    pub restarts: Option<usize>,
    pub max_iterations: Option<usize>,
    pub gradient_step: Option<f64>,
    pub convergence_tol: Option<f64>,
    pub jobs: Option<usize>,
    pub params: Option<PathBuf>,
    pub no_decouple: Option<bool>,
    pub db_grid: Option<Vec<f64>>,
    pub extrapolate: Option<Vec<f64>>,
    pub confidence: Option<f64>,
    pub plot_data: Option<bool>,
    pub pairs: Option<usize>,
    pub squeezing_db: Option<Vec<f64>>,
    pub crosstalk: Option<CrosstalkArg>,
    pub strength: Option<f64>,
    pub excess_noise: Option<Vec<f64>>,
    pub name: Option<String>,
    pub ordering: Option<OrderingArg>,
    pub tolerance: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> AppResult<Self> {
        match path {
            Some(p) => parse_json(p, &read_bytes(p)?),
            None => Ok(Self::default()),
        }
    }
}

fn invalid(msg: impl Into<String>) -> AppError {
    AppError::Validation(msg.into())
}

pub fn resolve_input(args: &InputArgs, file: &FileConfig) -> AppResult<PathBuf> {
    args.input
        .clone()
        .or_else(|| file.input.clone())
        .ok_or_else(|| invalid("--input is required"))
}

pub fn resolve_partition(
    args: &InputArgs,
    file: &FileConfig,
    n_modes: usize,
) -> AppResult<ModePartition> {
    let p = match args.pairing.or(file.pairing).unwrap_or_default() {
        Pairing::Halves => ModePartition::halves(n_modes),
        Pairing::Mirrored => ModePartition::mirrored(n_modes),
    };
    p.map_err(|e| invalid(e.to_string()))
}

pub fn resolve_out(out: &OutputArgs, file: &FileConfig) -> (PathBuf, Format) {
    (
        out.out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        out.format.or(file.format).unwrap_or_default(),
    )
}

/// Channel from flags, else from the config file, else lossless. Giving
/// both a transmittance and a loss at the same level is an error.
pub fn resolve_channel(key: &KeyArgs, file: &FileConfig) -> AppResult<ChannelSpec> {
    let channel = match (key.transmittance, key.loss_db) {
        (Some(_), Some(_)) => {
            return Err(invalid(
                "give either --transmittance or --loss-db, not both",
            ))
        }
        (Some(t), None) => ChannelSpec::transmittance(t),
        (None, Some(db)) => ChannelSpec::from_db(db),
        (None, None) => {
            let given = [
                file.transmittance.is_some(),
                file.loss_db.is_some(),
                file.transmittance_per_mode.is_some(),
                file.loss_db_per_mode.is_some(),
            ];
            if given.iter().filter(|&&g| g).count() > 1 {
                return Err(invalid("config file gives the channel more than once"));
            }
            if let Some(t) = file.transmittance {
                ChannelSpec::transmittance(t)
            } else if let Some(db) = file.loss_db {
                ChannelSpec::from_db(db)
            } else if let Some(t) = &file.transmittance_per_mode {
                ChannelSpec::per_mode(t.clone())
            } else if let Some(db) = &file.loss_db_per_mode {
                db.iter()
                    .map(|&d| ChannelSpec::from_db(d).map(|c| c.for_position(0)))
                    .collect::<Result<Vec<_>, _>>()
                    .and_then(ChannelSpec::per_mode)
            } else {
                Ok(ChannelSpec::lossless())
            }
        }
    };
    channel.map_err(|e| invalid(e.to_string()))
}

pub fn resolve_beta(cli: Option<f64>, file: Option<f64>, default: f64) -> AppResult<f64> {
    let beta = cli.or(file).unwrap_or(default);
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!("beta {beta} outside (0, 1]")));
    }
    Ok(beta)
}

pub fn resolve_quadrature(key: &KeyArgs, file: &FileConfig) -> Quadrature {
    key.quadrature
        .or(file.quadrature)
        .map(Quadrature::from)
        .unwrap_or_default()
}

/// The asymptotic estimate followed by one pessimistic estimate per
/// requested sample count.
pub fn resolve_estimates(key: &KeyArgs, file: &FileConfig) -> AppResult<Vec<ErrorModel>> {
    let mut out = vec![ErrorModel::Asymptotic];
    for &n in key
        .pessimistic_n
        .as_ref()
        .or(file.pessimistic_n.as_ref())
        .into_iter()
        .flatten()
    {
        out.push(ErrorModel::finite(n).map_err(|e| invalid(e.to_string()))?);
    }
    Ok(out)
}

pub fn resolve_optimizer(
    opt: &OptimizerArgs,
    key_quadrature: Quadrature,
    file: &FileConfig,
) -> AppResult<(OptimizerConfig, Option<usize>)> {
    let objective = match (opt.objective, &file.objective) {
        (Some(o), _) => o,
        (None, Some(s)) => parse_objective(s).map_err(invalid)?,
        (None, None) => ObjectiveKind::TotalMi,
    };
    let quadrature = match opt.objective_quadrature.or(file.objective_quadrature) {
        Some(ObjectiveQuadratureArg::X) => ObjectiveQuadrature::X,
        Some(ObjectiveQuadratureArg::P) => ObjectiveQuadrature::P,
        Some(ObjectiveQuadratureArg::Sum) => ObjectiveQuadrature::Sum,
        None => key_quadrature.into(),
    };
    let d = OptimizerConfig::default();
    let config = OptimizerConfig {
        objective,
        quadrature,
        max_local_iterations: opt
            .max_iterations
            .or(file.max_iterations)
            .unwrap_or(d.max_local_iterations),
        gradient_step: file.gradient_step.unwrap_or(d.gradient_step),
        convergence_tol: file.convergence_tol.unwrap_or(d.convergence_tol),
        hops: opt.hops.or(file.hops).unwrap_or(d.hops),
        hop_scale: opt.hop_scale.or(file.hop_scale).unwrap_or(d.hop_scale),
        rng_seed: opt.seed.or(file.seed).unwrap_or(d.rng_seed),
        parallel_restarts: opt
            .restarts
            .or(file.restarts)
            .unwrap_or(d.parallel_restarts),
    };
    config.validate().map_err(|e| invalid(e.to_string()))?;
    let jobs = opt.jobs.or(file.jobs);
    if jobs == Some(0) {
        return Err(invalid("--jobs must be at least 1"));
    }
    Ok((config, jobs))
}

pub fn ordering_of(arg: Option<OrderingArg>) -> Ordering {
    match arg {
        Some(OrderingArg::XxPpBlocks) => Ordering::XxPpBlocks,
        _ => Ordering::Interleaved,
    }
}

pub fn crosstalk_mode(arg: CrosstalkArg) -> CrosstalkMode {
    match arg {
        CrosstalkArg::Local => CrosstalkMode::LocalOnly,
        CrosstalkArg::Global => CrosstalkMode::Global,
    }
}
