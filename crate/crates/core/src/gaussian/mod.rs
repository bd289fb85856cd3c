//! Covariance-matrix description of multimode Gaussian states and the
//! passive symplectic operations the rest of the crate is built on.

mod homodyne;
pub(crate) mod network;
mod partition;
mod spectrum;
mod state;

pub use homodyne::{condition_on_homodyne, PINV_RELATIVE_CUTOFF};
pub use network::{
    apply_beamsplitter, apply_network, beamsplitter_matrix, coupler_count, NetworkParams,
};
pub use partition::ModePartition;
pub use spectrum::symplectic_spectrum;
pub use state::{
    embed_vacuum, restrict, validate, CovarianceState, ValidationReport, Violation,
    DEFAULT_PHYSICALITY_TOL, SYMMETRY_TOL, XP_WARN_TOL,
};

use nalgebra::DMatrix;

/// Homodyne quadrature. `X` occupies the even rows of an interleaved
/// covariance matrix, `P` the odd ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Quadrature {
    X,
    #[default]
    P,
}

impl Quadrature {
    #[inline]
    pub const fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }

    /// Row of this quadrature of `mode` in the interleaved ordering.
    #[inline]
    pub const fn row(self, mode: usize) -> usize {
        2 * mode + self.offset()
    }

    pub const fn name(self) -> &'static str {
        match self {
            Quadrature::X => "x",
            Quadrature::P => "p",
        }
    }
}

/// The symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]` for `n_modes` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        let mut matrix = DMatrix::zeros(dim, dim);
        for k in 0..n_modes {
            matrix[(2 * k, 2 * k + 1)] = 1.0;
            matrix[(2 * k + 1, 2 * k)] = -1.0;
        }
        Self { n_modes, matrix }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `‖S Ω Sᵀ − Ω‖_max`; zero for a symplectic `S`.
    pub fn symplectic_residual(&self, s: &DMatrix<f64>) -> f64 {
        let lhs = s * &self.matrix * s.transpose();
        (lhs - &self.matrix).amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_squares_to_minus_identity() {
        let omega = SymplecticForm::new(3);
        let m = omega.matrix();
        let sq = m * m;
        assert_eq!(sq, -DMatrix::<f64>::identity(6, 6));
        assert_eq!(m.transpose(), -m.clone());
    }
}
