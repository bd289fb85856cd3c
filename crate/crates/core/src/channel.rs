//! The untrusted, purely lossy channel on Bob's modes and the explicit
//! eavesdropper modes it creates.

use alloc::format;
use alloc::vec::Vec;

use crate::gaussian::network::{coupler_amplitudes, mix_indices};
use crate::gaussian::{embed_vacuum, restrict, CovarianceState, ModePartition};
use crate::{Error, Result};

/// Channel transmittance, either one value for every Bob mode or one value
/// per Bob mode (aligned with [`ModePartition::bob`]).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChannelSpec {
    Uniform(f64),
    PerMode(Vec<f64>),
}

impl ChannelSpec {
    pub fn transmittance(t: f64) -> Result<Self> {
        check(t)?;
        Ok(ChannelSpec::Uniform(t))
    }

    /// Loss in dB, `T = 10^(−dB/10)`.
    pub fn from_db(db: f64) -> Result<Self> {
        if !(db >= 0.0) || !db.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "loss {db} dB must be finite and >= 0"
            )));
        }
        Self::transmittance(libm::pow(10.0, -db / 10.0))
    }

    pub fn per_mode(t: Vec<f64>) -> Result<Self> {
        for &v in &t {
            check(v)?;
        }
        Ok(ChannelSpec::PerMode(t))
    }

    pub fn lossless() -> Self {
        ChannelSpec::Uniform(1.0)
    }

    pub fn is_uniform(&self) -> bool {
        match self {
            ChannelSpec::Uniform(_) => true,
            ChannelSpec::PerMode(v) => v.windows(2).all(|w| w[0] == w[1]),
        }
    }

    /// Transmittance seen by the Bob mode at `position` in Bob's list.
    pub fn for_position(&self, position: usize) -> f64 {
        match self {
            ChannelSpec::Uniform(t) => *t,
            ChannelSpec::PerMode(v) => v[position],
        }
    }

    /// Loss in dB of the Bob mode at `position`.
    pub fn loss_db(&self, position: usize) -> f64 {
        -10.0 * libm::log10(self.for_position(position))
    }

    pub fn check_against(&self, partition: &ModePartition) -> Result<()> {
        match self {
            ChannelSpec::Uniform(t) => check(*t),
            ChannelSpec::PerMode(v) if v.len() != partition.bob().len() => {
                Err(Error::Dimension(format!(
                    "{} transmittances for {} Bob modes",
                    v.len(),
                    partition.bob().len()
                )))
            }
            ChannelSpec::PerMode(v) => v.iter().try_for_each(|&t| check(t)),
        }
    }

    /// The channel restricted to a subset of Bob modes, given by their
    /// positions in the original Bob list.
    pub fn select(&self, positions: &[usize]) -> Self {
        match self {
            ChannelSpec::Uniform(t) => ChannelSpec::Uniform(*t),
            ChannelSpec::PerMode(v) => {
                ChannelSpec::PerMode(positions.iter().map(|&p| v[p]).collect())
            }
        }
    }
}

fn check(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "channel transmittance {t} outside (0, 1]"
        )));
    }
    Ok(())
}

/// Partition of a dilated state: the original parties, with Bob's indices
/// now carrying the transmitted modes, plus one Eve mode per Bob mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilatedPartition {
    pub parties: ModePartition,
    /// `eve[k]` holds the mode reflected off Bob's `k`-th mode.
    pub eve: Vec<usize>,
}

/// Beam-splitter dilation of the lossy channel.
///
/// One vacuum ancilla is appended per Bob mode and mixed with it at the
/// channel transmittance; the transmitted outputs stay on Bob's indices and
/// the reflected outputs become Eve's modes, appended after the originals.
pub fn dilate_loss(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
) -> Result<(CovarianceState, DilatedPartition)> {
    partition.check_against(state.n_modes())?;
    channel.check_against(partition)?;
    let n = state.n_modes();
    let bob = partition.bob();
    if bob.is_empty() {
        return Err(Error::Partition(
            "no Bob modes to send through the channel".into(),
        ));
    }
    let mut out = embed_vacuum(state, bob.len())?;
    let m = out.matrix_mut();
    let mut eve = Vec::with_capacity(bob.len());
    for (k, &b) in bob.iter().enumerate() {
        let e = n + k;
        let (a, r) = coupler_amplitudes(channel.for_position(k));
        mix_indices(m, 2 * b, 2 * e, a, r);
        mix_indices(m, 2 * b + 1, 2 * e + 1, a, r);
        eve.push(e);
    }
    Ok((
        out,
        DilatedPartition {
            parties: partition.clone(),
            eve,
        },
    ))
}

/// State shared by Alice and Bob after the channel (Eve traced out).
pub fn attenuate(
    state: &CovarianceState,
    partition: &ModePartition,
    channel: &ChannelSpec,
) -> Result<CovarianceState> {
    let (dilated, _) = dilate_loss(state, partition, channel)?;
    let keep: Vec<usize> = (0..state.n_modes()).collect();
    restrict(&dilated, &keep)
}
