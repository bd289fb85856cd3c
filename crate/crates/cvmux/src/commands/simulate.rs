use cvmux_core::source::{simulate, SourceSpec};
use serde::Serialize;

use crate::config::{self, CrosstalkArg, FileConfig, SimulateArgs};
use crate::error::{AppError, AppResult};
use crate::io::{ensure_dir, write_covariance, write_json};

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    covariance: String,
    spec: &'a SourceSpec,
}

pub fn run(args: &SimulateArgs) -> AppResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let n_pairs = args
        .pairs
        .or(file.pairs)
        .ok_or_else(|| AppError::Validation("--pairs is required".into()))?;
    let spec = SourceSpec {
        n_pairs,
        squeezing_db: args
            .squeezing_db
            .clone()
            .or_else(|| file.squeezing_db.clone())
            .unwrap_or_else(|| vec![3.0]),
        crosstalk_mode: config::crosstalk_mode(
            args.crosstalk
                .or(file.crosstalk)
                .unwrap_or(CrosstalkArg::Local),
        ),
        crosstalk_strength: args.strength.or(file.strength).unwrap_or(0.0),
        excess_noise: args
            .excess_noise
            .clone()
            .or_else(|| file.excess_noise.clone())
            .unwrap_or_default(),
        rng_seed: args.seed.or(file.seed).unwrap_or(0),
    };
    spec.validate()
        .map_err(|e| AppError::Validation(e.to_string()))?;
    let state = simulate(&spec)?;
    let out = args
        .out
        .clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| ".".into());
    let name = args
        .name
        .clone()
        .or_else(|| file.name.clone())
        .unwrap_or_else(|| "simulated".into());
    let ordering = config::ordering_of(args.ordering.or(file.ordering));

    ensure_dir(&out)?;
    let cov_name = format!("{name}.json");
    write_covariance(&out.join(&cov_name), &state, ordering)?;
    let sidecar = Sidecar {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        covariance: cov_name.clone(),
        spec: &spec,
    };
    write_json(&out.join(format!("{name}.spec.json")), &sidecar)?;
    println!(
        "wrote {} ({} modes)",
        out.join(cov_name).display(),
        state.n_modes()
    );
    Ok(())
}
