use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::objective::{local_optimize_flat, MiObjective};
use super::OptimizerConfig;
use crate::channel::ChannelSpec;
use crate::gaussian::{apply_network, CovarianceState, ModePartition, NetworkParams};
use crate::security::{key_rate, key_rate_processed, KeyRateReport};
use crate::{Error, Result};

/// Largest tolerated change of `χ_BE` between the original and the
/// processed state.
pub const HOLEVO_DRIFT_TOL: f64 = 1e-8;

/// One local search inside a chain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HopRecord {
    pub chain: usize,
    pub hop: usize,
    /// Objective reached by the local search; `None` if it failed.
    pub objective: Option<f64>,
    pub accepted: bool,
    /// Best objective of the chain after this hop.
    pub best: f64,
    pub iterations: usize,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutcome {
    pub chain: usize,
    pub best: Vec<f64>,
    pub objective: f64,
    pub trace: Vec<HopRecord>,
}

impl ChainOutcome {
    fn failures(&self) -> usize {
        self.trace.iter().filter(|h| h.error.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinOutcome {
    pub best: NetworkParams,
    pub objective: f64,
    /// Chain that produced `best`.
    pub chain: usize,
    /// Every hop of every chain, chains in index order.
    pub trace: Vec<HopRecord>,
}

/// RNG for chain `chain`: the ChaCha stream selected by the chain index.
pub(crate) fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

pub(crate) fn perturb(rng: &mut ChaCha8Rng, x: &[f64], scale: f64) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let u: f64 = rng.gen();
            (v + scale * (2.0 * u - 1.0)).clamp(0.0, 1.0)
        })
        .collect()
}

/// Runs one greedy basin-hopping chain starting from `init`.
///
/// Each hop perturbs the chain's best point, runs a local search and keeps
/// the result only if it improves on the best. A failing local search is
/// recorded in the trace and skipped.
pub fn run_chain(
    objective: &MiObjective,
    init: &[f64],
    config: &OptimizerConfig,
    chain: usize,
) -> Result<ChainOutcome> {
    let mut rng = chain_rng(config.rng_seed, chain);
    let mut best = init.to_vec();
    let mut best_value = objective.value_flat(init)?;
    let mut trace = Vec::with_capacity(config.hops);
    for hop in 0..config.hops {
        let start = perturb(&mut rng, &best, config.hop_scale);
        let record = match local_optimize_flat(objective, &start, config) {
            Ok(local) => {
                let accepted = local.objective > best_value;
                if accepted {
                    best = local.params.to_flat();
                    best_value = local.objective;
                }
                HopRecord {
                    chain,
                    hop,
                    objective: Some(local.objective),
                    accepted,
                    best: best_value,
                    iterations: local.iterations,
                    converged: local.converged,
                    error: None,
                }
            }
            Err(e) => {
                log::debug!("chain {chain} hop {hop}: local search failed: {e}");
                HopRecord {
                    chain,
                    hop,
                    objective: None,
                    accepted: false,
                    best: best_value,
                    iterations: 0,
                    converged: false,
                    error: Some(e.to_string()),
                }
            }
        };
        trace.push(record);
    }
    Ok(ChainOutcome {
        chain,
        best,
        objective: best_value,
        trace,
    })
}

/// Best-of over finished chains; ties go to the lower chain index, so the
/// result does not depend on the order in which chains were run.
pub fn aggregate_chains(
    partition: &ModePartition,
    mut chains: Vec<ChainOutcome>,
) -> Result<BasinOutcome> {
    if chains.is_empty() {
        return Err(Error::InvalidParameter("no chains to aggregate".into()));
    }
    chains.sort_by_key(|c| c.chain);
    let total_hops: usize = chains.iter().map(|c| c.trace.len()).sum();
    let failed: usize = chains.iter().map(ChainOutcome::failures).sum();
    if failed == total_hops {
        let reasons = chains
            .iter()
            .flat_map(|c| c.trace.iter())
            .filter_map(|h| {
                h.error
                    .as_ref()
                    .map(|e| format!("chain {} hop {}: {e}", h.chain, h.hop))
            })
            .collect();
        return Err(Error::AllRestartsFailed(reasons));
    }
    let mut winner = 0;
    for (k, c) in chains.iter().enumerate() {
        if c.objective > chains[winner].objective {
            winner = k;
        }
    }
    let best = NetworkParams::from_flat(partition, &chains[winner].best)?;
    let objective = chains[winner].objective;
    let chain = chains[winner].chain;
    let trace = chains.into_iter().flat_map(|c| c.trace).collect();
    Ok(BasinOutcome {
        best,
        objective,
        chain,
        trace,
    })
}

/// Basin hopping from the identity network, chains run one after another.
pub fn basin_hop(
    state: &CovarianceState,
    partition: &ModePartition,
    config: &OptimizerConfig,
) -> Result<BasinOutcome> {
    basin_hop_from(
        state,
        partition,
        &NetworkParams::identity(partition),
        config,
    )
}

pub fn basin_hop_from(
    state: &CovarianceState,
    partition: &ModePartition,
    init: &NetworkParams,
    config: &OptimizerConfig,
) -> Result<BasinOutcome> {
    config.validate()?;
    init.matches(partition)?;
    let objective = MiObjective::new(state, partition, config)?;
    let init = init.to_flat();
    let chains = (0..config.parallel_restarts)
        .map(|c| run_chain(&objective, &init, config, c))
        .collect::<Result<Vec<_>>>()?;
    aggregate_chains(partition, chains)
}

/// Outcome of [`decouple`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decoupled {
    /// `γ_f = U γ Uᵀ`.
    pub state: CovarianceState,
    pub params: NetworkParams,
    pub before: KeyRateReport,
    pub after: KeyRateReport,
    pub search: BasinOutcome,
}

impl Decoupled {
    /// `after / before` key ratio; infinite when there was no key before.
    pub fn key_ratio(&self) -> f64 {
        ratio(self.after.key_rate, self.before.key_rate)
    }

    pub fn mi_ratio(&self) -> f64 {
        ratio(self.after.total_mi, self.before.total_mi)
    }
}

fn ratio(after: f64, before: f64) -> f64 {
    if before > 0.0 {
        after / before
    } else if after > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Optimises the local networks, applies them and reports the key before
/// and after under the same channel and reconciliation efficiency.
///
/// With a uniform channel the processed report is computed from `γ_f`
/// itself, so a symplecticity error shows up as Holevo drift. With
/// per-mode losses the processing is applied after the channel.
pub fn decouple(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    beta: f64,
    config: &OptimizerConfig,
) -> Result<Decoupled> {
    let search = basin_hop(state, partition, config)?;
    finish_decouple(state, partition, channel, beta, config, search)
}

/// Second half of [`decouple`], for callers that ran the search themselves
/// (e.g. with chains on several threads).
pub fn finish_decouple(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    beta: f64,
    config: &OptimizerConfig,
    search: BasinOutcome,
) -> Result<Decoupled> {
    let q = config.quadrature.key_quadrature();
    let transformed = apply_network(state, partition, &search.best)?;
    let before = key_rate(state, partition, channel, beta, q)?;
    let after = if channel.is_uniform() {
        key_rate(&transformed, partition, channel, beta, q)?
    } else {
        key_rate_processed(state, partition, channel, &search.best, beta, q)?
    };
    let drift = libm::fabs(after.holevo - before.holevo);
    if drift > HOLEVO_DRIFT_TOL {
        return Err(Error::HolevoDrift(drift));
    }
    Ok(Decoupled {
        state: transformed,
        params: search.best.clone(),
        before,
        after,
        search,
    })
}
