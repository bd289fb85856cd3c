//! Study-level procedures: pair ranking, key rate versus number of pairs,
//! key rate versus channel loss, linear extrapolation with prediction
//! bands, and the decoupling efficiency.

mod fit;
pub mod student_t;

pub use fit::{linear_fit_prediction_bands, FitResult};
pub use student_t::two_sided_t_quantile;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::channel::ChannelSpec;
use crate::gaussian::{restrict, CovarianceState, ModePartition, Quadrature};
use crate::security::{pessimistic_key_rate, ErrorModel, KeyRateReport};
use crate::{Error, Result};

/// Whether a state is the measured one or the locally processed one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Processing {
    Original,
    Decoupled,
}

impl Processing {
    pub fn name(self) -> &'static str {
        match self {
            Processing::Original => "original",
            Processing::Decoupled => "decoupled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SweepAxis {
    Pairs,
    LossDb,
}

/// A key-rate curve along one axis, with the mutual information and
/// Holevo bound behind each point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub axis_kind: SweepAxis,
    pub axis: Vec<f64>,
    pub key_rates: Vec<f64>,
    pub raw_keys: Vec<f64>,
    pub total_mi: Vec<f64>,
    pub holevo: Vec<f64>,
    pub processing: Processing,
    pub estimate: ErrorModel,
}

impl SweepResult {
    /// Assembles a curve from per-point reports, checking the axis.
    pub fn from_reports(
        axis_kind: SweepAxis,
        axis: Vec<f64>,
        reports: &[KeyRateReport],
        processing: Processing,
        estimate: ErrorModel,
    ) -> Result<Self> {
        if axis.len() != reports.len() {
            return Err(Error::Dimension(format!(
                "{} axis values for {} reports",
                axis.len(),
                reports.len()
            )));
        }
        if axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "sweep axis must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            axis_kind,
            axis,
            key_rates: reports.iter().map(|r| r.key_rate).collect(),
            raw_keys: reports.iter().map(KeyRateReport::raw_key).collect(),
            total_mi: reports.iter().map(|r| r.total_mi).collect(),
            holevo: reports.iter().map(|r| r.holevo).collect(),
            processing,
            estimate,
        })
    }

    /// `original`, `decoupled`, or e.g. `decoupled_n5000` for a pessimistic
    /// curve.
    pub fn variant_tag(&self) -> String {
        match self.estimate {
            ErrorModel::Asymptotic => self.processing.name().into(),
            ErrorModel::Finite { n_samples } => format!("{}_n{n_samples}", self.processing.name()),
        }
    }
}

/// A pair with the key it supports on its own.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankedPair {
    /// Index into the partition's pairing.
    pub pair: usize,
    pub alice: usize,
    pub bob: usize,
    pub report: KeyRateReport,
}

/// Key rate of one pair from its reduced two-mode state (all other modes
/// traced out) sent through its own channel mode.
pub fn single_pair_key(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    beta: f64,
    quadrature: Quadrature,
    pair: usize,
) -> Result<KeyRateReport> {
    subset_key(
        state,
        partition,
        channel,
        beta,
        quadrature,
        &[pair],
        ErrorModel::Asymptotic,
    )
}

fn subset_key(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    beta: f64,
    quadrature: Quadrature,
    pairs: &[usize],
    estimate: ErrorModel,
) -> Result<KeyRateReport> {
    let (keep, sub) = partition.select_pairs(pairs)?;
    let reduced = restrict(state, &keep)?;
    let mut bob_positions: Vec<usize> = pairs
        .iter()
        .map(|&p| {
            partition
                .bob_position(partition.pairing()[p].1)
                .expect("paired Bob mode")
        })
        .collect();
    bob_positions.sort_unstable();
    let ch = channel.select(&bob_positions);
    pessimistic_key_rate(&reduced, &sub, &ch, beta, quadrature, estimate)
}

/// Pairs ordered by their individual key, best first.
///
/// Ordering uses the unclamped key `β I − χ` so pairs below the cutoff are
/// still ranked; ties go to the lower Alice mode.
pub fn rank_pairs(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    beta: f64,
    quadrature: Quadrature,
) -> Result<Vec<RankedPair>> {
    channel.check_against(partition)?;
    let mut ranked = (0..partition.n_pairs())
        .map(|k| {
            let (alice, bob) = partition.pairing()[k];
            let report = single_pair_key(state, partition, channel, beta, quadrature, k)?;
            Ok(RankedPair {
                pair: k,
                alice,
                bob,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        b.report
            .raw_key()
            .total_cmp(&a.report.raw_key())
            .then(a.alice.cmp(&b.alice))
    });
    Ok(ranked)
}

/// Key rate using the best `k` pairs, `k = 1 … n`, once per requested
/// error estimate. The ranking comes from the asymptotic single-pair keys
/// of `state` itself.
pub fn incremental_key_curve(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    beta: f64,
    quadrature: Quadrature,
    processing: Processing,
    estimates: &[ErrorModel],
) -> Result<Vec<SweepResult>> {
    let order: Vec<usize> = rank_pairs(state, partition, channel, beta, quadrature)?
        .iter()
        .map(|r| r.pair)
        .collect();
    estimates
        .iter()
        .map(|&est| {
            let reports = (1..=order.len())
                .map(|k| {
                    subset_key(
                        state,
                        partition,
                        channel,
                        beta,
                        quadrature,
                        &order[..k],
                        est,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let axis = (1..=order.len()).map(|k| k as f64).collect();
            SweepResult::from_reports(SweepAxis::Pairs, axis, &reports, processing, est)
        })
        .collect()
}

/// Largest loss with a positive key.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Cutoff {
    /// No positive key anywhere on the grid.
    NoKey,
    /// Zero crossing, interpolated linearly in dB between grid points.
    Within(f64),
    /// Still positive at the last grid point.
    BeyondGrid(f64),
}

impl Cutoff {
    pub fn db(self) -> Option<f64> {
        match self {
            Cutoff::NoKey => None,
            Cutoff::Within(d) | Cutoff::BeyondGrid(d) => Some(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossSweep {
    pub result: SweepResult,
    pub cutoff: Cutoff,
}

/// The default loss grid, 0 to 40 dB in 0.5 dB steps.
pub fn default_db_grid() -> Vec<f64> {
    (0..=80).map(|k| 0.5 * k as f64).collect()
}

pub fn check_db_grid(db_grid: &[f64]) -> Result<()> {
    if db_grid.is_empty() {
        return Err(Error::InvalidParameter("empty loss grid".into()));
    }
    if db_grid.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
        return Err(Error::InvalidParameter(
            "loss grid values must be finite and >= 0".into(),
        ));
    }
    if db_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "loss grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Key rate at every grid loss (uniform over Bob's modes).
pub fn loss_sweep(
    state: &CovarianceState,
    partition: &ModePartition,
    beta: f64,
    quadrature: Quadrature,
    db_grid: &[f64],
    processing: Processing,
) -> Result<LossSweep> {
    check_db_grid(db_grid)?;
    let reports = db_grid
        .iter()
        .map(|&db| loss_point(state, partition, beta, quadrature, db))
        .collect::<Result<Vec<_>>>()?;
    loss_sweep_from_reports(db_grid, &reports, processing)
}

/// One grid point of [`loss_sweep`].
pub fn loss_point(
    state: &CovarianceState,
    partition: &ModePartition,
    beta: f64,
    quadrature: Quadrature,
    db: f64,
) -> Result<KeyRateReport> {
    let channel = ChannelSpec::from_db(db)?;
    pessimistic_key_rate(
        state,
        partition,
        &channel,
        beta,
        quadrature,
        ErrorModel::Asymptotic,
    )
}

pub fn loss_sweep_from_reports(
    db_grid: &[f64],
    reports: &[KeyRateReport],
    processing: Processing,
) -> Result<LossSweep> {
    let result = SweepResult::from_reports(
        SweepAxis::LossDb,
        db_grid.to_vec(),
        reports,
        processing,
        ErrorModel::Asymptotic,
    )?;
    let cutoff = find_cutoff(&result.axis, &result.key_rates, &result.raw_keys);
    Ok(LossSweep { result, cutoff })
}

fn find_cutoff(axis: &[f64], keys: &[f64], raw: &[f64]) -> Cutoff {
    let Some(last) = keys.iter().rposition(|&k| k > 0.0) else {
        return Cutoff::NoKey;
    };
    if last + 1 == axis.len() {
        return Cutoff::BeyondGrid(axis[last]);
    }
    let (x0, x1) = (axis[last], axis[last + 1]);
    let (r0, r1) = (raw[last], raw[last + 1]);
    let frac = if r0 - r1 > 0.0 {
        (r0 / (r0 - r1)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Cutoff::Within(x0 + frac * (x1 - x0))
}

/// Achieved total key over the ideal of `n_pairs` copies of the best single
/// pair.
pub fn decoupling_efficiency(
    total_key: f64,
    best_single_pair_key: f64,
    n_pairs: usize,
) -> Result<f64> {
    if !(best_single_pair_key > 0.0) || n_pairs == 0 {
        return Err(Error::InvalidParameter(format!(
            "efficiency needs a positive best-pair key and at least one pair (got {best_single_pair_key}, {n_pairs})"
        )));
    }
    Ok(total_key / (n_pairs as f64 * best_single_pair_key))
}
