//! Mutual information, von Neumann entropy, the Holevo bound on Eve's
//! information and the reverse-reconciliation key rate
//! `K = max{0, β I_AB − χ_BE}`, plus the worst-case finite-sample
//! adjustment of the covariance matrix.

use alloc::format;
use alloc::vec::Vec;

use crate::channel::{dilate_loss, ChannelSpec, DilatedPartition};
use crate::gaussian::network::apply_side_strided;
use crate::gaussian::{
    condition_on_homodyne, restrict, symplectic_spectrum, CovarianceState, ModePartition,
    NetworkParams, Quadrature,
};
use crate::{Error, Result};

/// Arguments of [`g_function`] in `[−G_TOLERANCE, 0)` are treated as zero.
pub const G_TOLERANCE: f64 = 1e-9;
/// Symplectic eigenvalues in `[1 − ENTROPY_TOLERANCE, 1)` count as 1.
pub const ENTROPY_TOLERANCE: f64 = 1e-6;
/// Holevo values in `[−HOLEVO_FLOOR, 0)` are reported as 0.
pub const HOLEVO_FLOOR: f64 = 1e-9;

/// `G(x) = (x+1) log₂(x+1) − x log₂ x`, the entropy of a thermal mode with
/// mean photon number `x`.
pub fn g_function(x: f64) -> Result<f64> {
    if !(x >= -G_TOLERANCE) {
        return Err(Error::InvalidParameter(format!(
            "G(x) needs x >= 0, got {x} (unphysical state upstream)"
        )));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * libm::log2(x + 1.0) - x * libm::log2(x))
}

/// How entropy evaluation treats symplectic eigenvalues below 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Physicality {
    /// Values within [`ENTROPY_TOLERANCE`] of 1 are clamped, anything lower
    /// is an error.
    #[default]
    Strict,
    /// Every value below 1 is clamped (with a warning). Used for
    /// pessimistically adjusted matrices, which need not be physical.
    Clamp,
}

/// `S = Σ G((ν_i − 1)/2)` in bits.
pub fn von_neumann_entropy(state: &CovarianceState) -> Result<f64> {
    von_neumann_entropy_with(state, Physicality::Strict, "entropy")
}

pub fn von_neumann_entropy_with(
    state: &CovarianceState,
    policy: Physicality,
    context: &str,
) -> Result<f64> {
    let mut total = 0.0;
    for nu in symplectic_spectrum(state)? {
        let nu = if nu >= 1.0 {
            nu
        } else if nu >= 1.0 - ENTROPY_TOLERANCE {
            1.0
        } else if policy == Physicality::Clamp {
            log::warn!("{context}: clamping symplectic eigenvalue {nu} to 1");
            1.0
        } else {
            return Err(Error::Unphysical {
                context: context.into(),
                eigenvalue: nu,
            });
        };
        total += g_function((nu - 1.0) / 2.0)?;
    }
    Ok(total)
}

/// Shannon information between the homodyne outcomes of every pair in
/// `partition`, `I = log₂(V_A / (V_A − C²/V_B))`, and its sum.
pub fn pairwise_mutual_information(
    state: &CovarianceState,
    partition: &ModePartition,
    quadrature: Quadrature,
) -> Result<(Vec<f64>, f64)> {
    partition.check_against(state.n_modes())?;
    let per_pair = partition
        .pairing()
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let va = state.entry(quadrature, a, a);
            let vb = state.entry(quadrature, b, b);
            let c = state.entry(quadrature, a, b);
            pair_information(k, a, b, va, vb, c)
        })
        .collect::<Result<Vec<f64>>>()?;
    let total = per_pair.iter().sum();
    Ok((per_pair, total))
}

#[inline]
pub(crate) fn pair_information(
    pair: usize,
    a: usize,
    b: usize,
    va: f64,
    vb: f64,
    c: f64,
) -> Result<f64> {
    if !(va > 0.0) {
        return Err(Error::NonPositiveVariance {
            mode: a,
            variance: va,
        });
    }
    if !(vb > 0.0) {
        return Err(Error::NonPositiveVariance {
            mode: b,
            variance: vb,
        });
    }
    let c2 = c * c;
    if c2 >= va * vb {
        return Err(Error::Correlation {
            pair,
            c2,
            vavb: va * vb,
        });
    }
    // log₂(V_A / (V_A − C²/V_B)) = −log₂(1 − C²/(V_A V_B)), written to stay
    // accurate when the correlation is tiny.
    Ok(-libm::log1p(-c2 / (va * vb)) / core::f64::consts::LN_2)
}

/// `χ_BE = S(E) − S(E|B)` for the eavesdropper holding the reflected
/// channel modes and Bob homodyning all his modes jointly in `quadrature`.
pub fn holevo_bound(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    quadrature: Quadrature,
) -> Result<f64> {
    let (dilated, dp) = dilate_loss(state, partition, channel)?;
    holevo_from_dilated(&dilated, &dp, quadrature, Physicality::Strict)
}

pub(crate) fn holevo_from_dilated(
    dilated: &CovarianceState,
    dp: &DilatedPartition,
    quadrature: Quadrature,
    policy: Physicality,
) -> Result<f64> {
    let eve_state = restrict(dilated, &dp.eve)?;
    let s_e = von_neumann_entropy_with(&eve_state, policy, "S(E)")?;

    let bob = dp.parties.bob();
    let mut keep: Vec<usize> = bob.to_vec();
    keep.extend_from_slice(&dp.eve);
    let joint = restrict(dilated, &keep)?;
    let measured: Vec<usize> = (0..bob.len()).collect();
    let eve_given_bob = condition_on_homodyne(&joint, &measured, quadrature)?;
    let s_e_b = von_neumann_entropy_with(&eve_given_bob, policy, "S(E|B)")?;

    let chi = s_e - s_e_b;
    if chi >= 0.0 {
        Ok(chi)
    } else if chi >= -HOLEVO_FLOOR {
        Ok(0.0)
    } else {
        Err(Error::NegativeHolevo(chi))
    }
}

/// Finite-sample error model: `N` measured samples, or the asymptotic limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ErrorModel {
    Finite { n_samples: u64 },
    Asymptotic,
}

impl ErrorModel {
    pub fn finite(n_samples: u64) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::InvalidParameter(format!(
                "need N >= 2 samples, got {n_samples}"
            )));
        }
        Ok(ErrorModel::Finite { n_samples })
    }

    pub fn n_samples(&self) -> Option<u64> {
        match self {
            ErrorModel::Finite { n_samples } => Some(*n_samples),
            ErrorModel::Asymptotic => None,
        }
    }

    /// `1/√(N+1)`; zero in the asymptotic limit.
    pub fn scale(&self) -> f64 {
        match self {
            ErrorModel::Finite { n_samples } => 1.0 / libm::sqrt(*n_samples as f64 + 1.0),
            ErrorModel::Asymptotic => 0.0,
        }
    }
}

/// Worst-case covariance matrix given the standard errors of its entries
/// after `N` samples.
///
/// Variances grow by `√2 V/√(N+1)`; every off-diagonal entry shrinks in
/// magnitude by `√(V_i V_j + C²)/√(N+1)`, stopping at zero instead of
/// changing sign. The result is symmetric by construction and may be
/// unphysical.
pub fn pessimistic_adjust(state: &CovarianceState, err: ErrorModel) -> CovarianceState {
    let scale = err.scale();
    if scale == 0.0 {
        return state.clone();
    }
    let g = state.matrix();
    let dim = g.nrows();
    let mut out = g.clone();
    for i in 0..dim {
        out[(i, i)] = g[(i, i)] + core::f64::consts::SQRT_2 * g[(i, i)] * scale;
        for j in (i + 1)..dim {
            let c = 0.5 * (g[(i, j)] + g[(j, i)]);
            let sigma = libm::sqrt(libm::fabs(g[(i, i)] * g[(j, j)] + c * c)) * scale;
            let shrunk = libm::copysign(libm::fmax(libm::fabs(c) - sigma, 0.0), c);
            out[(i, j)] = shrunk;
            out[(j, i)] = shrunk;
        }
    }
    CovarianceState::from_parts(out, state.labels().map(|l| l.to_vec()))
}

/// Everything that goes into one key-rate evaluation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KeyRateReport {
    /// Bits per channel use for each pair, in pairing order.
    pub per_pair_mi: Vec<f64>,
    pub total_mi: f64,
    pub holevo: f64,
    pub beta: f64,
    /// `max(0, beta * total_mi - holevo)`.
    pub key_rate: f64,
    pub quadrature: Quadrature,
    pub channel: ChannelSpec,
    /// Sample count of the pessimistic adjustment, `None` when asymptotic.
    pub n_samples: Option<u64>,
    /// Set when the quadrature was chosen as the better of x and p.
    pub best_of_both: bool,
}

impl KeyRateReport {
    /// `beta * total_mi - holevo` before clamping; negative below the cutoff.
    pub fn raw_key(&self) -> f64 {
        self.beta * self.total_mi - self.holevo
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta {beta} outside (0, 1]"
        )));
    }
    Ok(())
}

/// Reverse-reconciliation key rate of `state` after Bob's modes pass
/// through `channel`.
pub fn key_rate(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    beta: f64,
    quadrature: Quadrature,
) -> Result<KeyRateReport> {
    check_beta(beta)?;
    let (dilated, dp) = dilate_loss(state, partition, channel)?;
    evaluate_dilated(
        &dilated,
        &dp,
        channel,
        beta,
        quadrature,
        Physicality::Strict,
        None,
    )
}

/// Key rate of the worst-case matrix for `err`; entropies clamp instead of
/// failing on sub-vacuum eigenvalues.
pub fn pessimistic_key_rate(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    beta: f64,
    quadrature: Quadrature,
    err: ErrorModel,
) -> Result<KeyRateReport> {
    check_beta(beta)?;
    let adjusted = pessimistic_adjust(state, err);
    let (dilated, dp) = dilate_loss(&adjusted, partition, channel)?;
    let policy = match err {
        ErrorModel::Asymptotic => Physicality::Strict,
        ErrorModel::Finite { .. } => Physicality::Clamp,
    };
    evaluate_dilated(
        &dilated,
        &dp,
        channel,
        beta,
        quadrature,
        policy,
        err.n_samples(),
    )
}

/// Evaluates both quadratures and keeps the larger key.
pub fn key_rate_best_quadrature(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    beta: f64,
) -> Result<KeyRateReport> {
    let x = key_rate(state, partition, channel, beta, Quadrature::X)?;
    let p = key_rate(state, partition, channel, beta, Quadrature::P)?;
    let mut best = if x.raw_key() > p.raw_key() { x } else { p };
    best.best_of_both = true;
    Ok(best)
}

/// Key rate when both parties apply `params` to the data they hold after
/// the channel. Eve's modes are untouched, so `χ_BE` equals the value for
/// the unprocessed state for any channel.
pub fn key_rate_processed(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
    params: &NetworkParams,
    beta: f64,
    quadrature: Quadrature,
) -> Result<KeyRateReport> {
    check_beta(beta)?;
    params.matches(partition)?;
    let (mut dilated, dp) = dilate_loss(state, partition, channel)?;
    let m = dilated.matrix_mut();
    apply_side_strided(m, partition.alice(), params.alice(), 2);
    apply_side_strided(m, partition.bob(), params.bob(), 2);
    evaluate_dilated(
        &dilated,
        &dp,
        channel,
        beta,
        quadrature,
        Physicality::Strict,
        None,
    )
}

fn evaluate_dilated(
    dilated: &CovarianceState,
    dp: &DilatedPartition,
    channel: &ChannelSpec,
    beta: f64,
    quadrature: Quadrature,
    policy: Physicality,
    n_samples: Option<u64>,
) -> Result<KeyRateReport> {
    let (per_pair_mi, total_mi) = pairwise_mutual_information(dilated, &dp.parties, quadrature)?;
    let holevo = holevo_from_dilated(dilated, dp, quadrature, policy)?;
    let key_rate = libm::fmax(0.0, beta * total_mi - holevo);
    Ok(KeyRateReport {
        per_pair_mi,
        total_mi,
        holevo,
        beta,
        key_rate,
        quadrature,
        channel: channel.clone(),
        n_samples,
        best_of_both: false,
    })
}
