//! Thread-pool wrappers. Work is split into independent items and
//! collected in index order, so results never depend on the thread count.

use cvmux_core::decoupler::{
    aggregate_chains, run_chain, BasinOutcome, MiObjective, NetworkParams, OptimizerConfig,
};
use cvmux_core::{CovarianceState, ModePartition};
use rayon::prelude::*;

use crate::error::{AppError, AppResult};

/// Runs `f` on a pool of `jobs` threads (rayon's default when `None`).
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> AppResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| AppError::Validation(format!("cannot start {jobs:?} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Basin hopping with the chains spread over the current pool.
pub fn basin_hop(
    state: &CovarianceState,
    partition: &ModePartition,
    config: &OptimizerConfig,
) -> cvmux_core::Result<BasinOutcome> {
    config.validate()?;
    let objective = MiObjective::new(state, partition, config)?;
    let init = NetworkParams::identity(partition).to_flat();
    let chains = (0..config.parallel_restarts)
        .into_par_iter()
        .map(|c| run_chain(&objective, &init, config, c))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<cvmux_core::Result<Vec<_>>>()?;
    aggregate_chains(partition, chains)
}

/// Ordered parallel map that stops at the first error in index order.
pub fn try_map<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync + Send,
{
    items
        .par_iter()
        .map(f)
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
