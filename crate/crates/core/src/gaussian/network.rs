use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{CovarianceState, ModePartition};
use crate::{Error, Result};

/// Transmittances of the two local beam-splitter networks.
///
/// One coupler per unordered pair of modes on each side, Alice's block
/// first. Within a block the couplers for the side's modes `m_0 … m_{n-1}`
/// are ordered `(m_0,m_1), (m_0,m_2), …, (m_0,m_{n-1}), (m_1,m_2), …,
/// (m_{n-2},m_{n-1})`, which is also the order in which they act on the
/// state: the first coupler is applied first.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetworkParams {
    alice: Vec<f64>,
    bob: Vec<f64>,
}

/// Number of couplers in a full pairwise network on `n` modes.
#[inline]
pub const fn coupler_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl NetworkParams {
    pub fn new(alice: Vec<f64>, bob: Vec<f64>) -> Result<Self> {
        for &t in alice.iter().chain(&bob) {
            check_transmittance(t)?;
        }
        Ok(Self { alice, bob })
    }

    /// Every coupler at `t = 1`: the identity up to quadrature sign flips.
    pub fn identity(partition: &ModePartition) -> Self {
        Self::filled(partition, 1.0)
    }

    pub fn filled(partition: &ModePartition, t: f64) -> Self {
        Self {
            alice: alloc::vec![t; coupler_count(partition.alice().len())],
            bob: alloc::vec![t; coupler_count(partition.bob().len())],
        }
    }

    /// Splits a flat vector (Alice's block then Bob's) for `partition`.
    pub fn from_flat(partition: &ModePartition, t: &[f64]) -> Result<Self> {
        let na = coupler_count(partition.alice().len());
        let nb = coupler_count(partition.bob().len());
        if t.len() != na + nb {
            return Err(Error::Dimension(format!(
                "{} transmittances, partition needs {na} + {nb}",
                t.len()
            )));
        }
        Self::new(t[..na].to_vec(), t[na..].to_vec())
    }

    pub fn alice(&self) -> &[f64] {
        &self.alice
    }

    pub fn bob(&self) -> &[f64] {
        &self.bob
    }

    pub fn len(&self) -> usize {
        self.alice.len() + self.bob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.alice.clone();
        v.extend_from_slice(&self.bob);
        v
    }

    pub fn matches(&self, partition: &ModePartition) -> Result<()> {
        let na = coupler_count(partition.alice().len());
        let nb = coupler_count(partition.bob().len());
        if self.alice.len() != na || self.bob.len() != nb {
            return Err(Error::Dimension(format!(
                "network has {}+{} couplers, partition needs {na}+{nb}",
                self.alice.len(),
                self.bob.len()
            )));
        }
        Ok(())
    }
}

fn check_transmittance(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "transmittance {t} outside [0, 1]"
        )));
    }
    Ok(())
}

/// `M ← T M Tᵀ` for the coupler `[[a, b], [b, −a]]` acting on matrix
/// indices `ri` and `rj`.
#[inline]
pub(crate) fn mix_indices(m: &mut DMatrix<f64>, ri: usize, rj: usize, a: f64, b: f64) {
    let dim = m.nrows();
    for c in 0..dim {
        let (u, v) = (m[(ri, c)], m[(rj, c)]);
        m[(ri, c)] = a * u + b * v;
        m[(rj, c)] = b * u - a * v;
    }
    for r in 0..dim {
        let (u, v) = (m[(r, ri)], m[(r, rj)]);
        m[(r, ri)] = a * u + b * v;
        m[(r, rj)] = b * u - a * v;
    }
}

#[inline]
pub(crate) fn coupler_amplitudes(t: f64) -> (f64, f64) {
    (libm::sqrt(t), libm::sqrt(1.0 - t))
}

/// Applies a side's network in coupler order to a matrix where each mode
/// owns the `stride` consecutive rows starting at `stride * k`.
pub(crate) fn apply_side_strided(m: &mut DMatrix<f64>, modes: &[usize], t: &[f64], stride: usize) {
    let mut k = 0;
    for (p, &mi) in modes.iter().enumerate() {
        for &mj in &modes[p + 1..] {
            let (a, b) = coupler_amplitudes(t[k]);
            for q in 0..stride {
                mix_indices(m, stride * mi + q, stride * mj + q, a, b);
            }
            k += 1;
        }
    }
}

/// The full `2N × 2N` coupler matrix `T_ij`: `√t` on mode `i`, `−√t` on mode
/// `j`, `√(1−t)` between them, identity elsewhere.
pub fn beamsplitter_matrix(n_modes: usize, i: usize, j: usize, t: f64) -> Result<DMatrix<f64>> {
    check_pair(n_modes, i, j)?;
    check_transmittance(t)?;
    let (a, b) = coupler_amplitudes(t);
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for q in 0..2 {
        let (ri, rj) = (2 * i + q, 2 * j + q);
        m[(ri, ri)] = a;
        m[(ri, rj)] = b;
        m[(rj, ri)] = b;
        m[(rj, rj)] = -a;
    }
    Ok(m)
}

fn check_pair(n_modes: usize, i: usize, j: usize) -> Result<()> {
    for index in [i, j] {
        if index >= n_modes {
            return Err(Error::ModeIndex { index, n_modes });
        }
    }
    if i == j {
        return Err(Error::InvalidParameter(format!(
            "beam splitter needs two distinct modes, got {i} twice"
        )));
    }
    Ok(())
}

/// `T_ij γ T_ijᵀ` for a single beam splitter of transmittance `t`.
pub fn apply_beamsplitter(
    state: &CovarianceState,
    i: usize,
    j: usize,
    t: f64,
) -> Result<CovarianceState> {
    check_pair(state.n_modes(), i, j)?;
    check_transmittance(t)?;
    let (a, b) = coupler_amplitudes(t);
    let mut out = state.clone();
    let m = out.matrix_mut();
    mix_indices(m, 2 * i, 2 * j, a, b);
    mix_indices(m, 2 * i + 1, 2 * j + 1, a, b);
    Ok(out)
}

/// `γ_f = U γ Uᵀ` with `U = U_A U_B`; Alice's and Bob's networks never couple
/// across the partition.
pub fn apply_network(
    state: &CovarianceState,
    partition: &ModePartition,
    params: &NetworkParams,
) -> Result<CovarianceState> {
    partition.check_against(state.n_modes())?;
    params.matches(partition)?;
    for &t in params.alice.iter().chain(&params.bob) {
        check_transmittance(t)?;
    }
    let mut out = state.clone();
    let m = out.matrix_mut();
    apply_side_strided(m, partition.alice(), &params.alice, 2);
    apply_side_strided(m, partition.bob(), &params.bob, 2);
    Ok(out)
}
