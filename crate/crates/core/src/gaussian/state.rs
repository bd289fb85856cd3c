use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::spectrum::symplectic_spectrum;
use crate::{Error, Result};

/// Relative tolerance for `|γ_ij − γ_ji|`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Default slack below 1 allowed for symplectic eigenvalues.
pub const DEFAULT_PHYSICALITY_TOL: f64 = 1e-6;
/// `|⟨x_i p_j⟩|` above this produces a warning (never a violation).
pub const XP_WARN_TOL: f64 = 1e-6;

/// Covariance matrix of an `n`-mode Gaussian state in shot-noise units,
/// stored in interleaved quadrature order.
///
/// Construction only checks the shape. Symmetry and physicality are
/// reported by [`validate`], because pessimistically adjusted or measured
/// matrices are routinely slightly off and still have to be carried around.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    matrix: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl CovarianceState {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(Error::Dimension(format!(
                "matrix is {r}x{c}, expected square"
            )));
        }
        if r == 0 || r % 2 != 0 {
            return Err(Error::Dimension(format!(
                "side length {r} is not a positive even number"
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix contains non-finite entries".into(),
            ));
        }
        Ok(Self {
            matrix,
            labels: None,
        })
    }

    /// Builds a state from a row-major slice of `(2n)^2` entries.
    pub fn from_row_major(n_modes: usize, data: &[f64]) -> Result<Self> {
        let dim = 2 * n_modes;
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{} entries for {n_modes} modes, expected {}",
                data.len(),
                dim * dim
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    pub fn vacuum(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self {
            matrix: DMatrix::identity(dim, dim),
            labels: None,
        }
    }

    /// Single-mode-per-entry thermal product state `⊕ diag(V_k, V_k)`.
    pub fn thermal(variances: &[f64]) -> Result<Self> {
        let dim = 2 * variances.len();
        let mut m = DMatrix::zeros(dim, dim);
        for (k, &v) in variances.iter().enumerate() {
            m[(2 * k, 2 * k)] = v;
            m[(2 * k + 1, 2 * k + 1)] = v;
        }
        Self::new(m)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_modes() {
            return Err(Error::Dimension(format!(
                "{} labels for {} modes",
                labels.len(),
                self.n_modes()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Row-major copy of the matrix entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let dim = self.matrix.nrows();
        let mut out = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                out.push(self.matrix[(r, c)]);
            }
        }
        out
    }

    /// Entry `⟨q_i q_j⟩` for quadrature `q` of modes `i` and `j`.
    #[inline]
    pub fn entry(&self, q: super::Quadrature, i: usize, j: usize) -> f64 {
        self.matrix[(q.row(i), q.row(j))]
    }

    pub(crate) fn check_mode(&self, index: usize) -> Result<()> {
        if index >= self.n_modes() {
            return Err(Error::ModeIndex {
                index,
                n_modes: self.n_modes(),
            });
        }
        Ok(())
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.matrix
    }

    pub(crate) fn from_parts(matrix: DMatrix<f64>, labels: Option<Vec<String>>) -> Self {
        debug_assert!(matrix.is_square() && matrix.nrows() % 2 == 0);
        Self { matrix, labels }
    }
}

/// A failed invariant reported by [`validate`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Violation {
    Asymmetric {
        row: usize,
        col: usize,
        residual: f64,
    },
    Unphysical {
        min_symplectic_eigenvalue: f64,
    },
    SpectrumUnavailable(String),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    /// Largest `|γ_ij − γ_ji|`.
    pub symmetry_residual: f64,
    /// `None` when the spectrum could not be computed.
    pub min_symplectic_eigenvalue: Option<f64>,
    /// Largest `|⟨x_i p_j⟩|` over all `i, j`.
    pub max_xp_correlation: f64,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks symmetry and the uncertainty principle.
///
/// Only the shape is a hard error (and that is already enforced by the
/// [`CovarianceState`] constructor); everything else is listed in the report.
pub fn validate(state: &CovarianceState, physicality_tol: f64) -> ValidationReport {
    let m = state.matrix();
    let dim = m.nrows();
    let mut violations = Vec::new();
    let mut warnings = Vec::new();

    let mut symmetry_residual = 0.0f64;
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let residual = libm::fabs(m[(i, j)] - m[(j, i)]);
            symmetry_residual = symmetry_residual.max(residual);
            let scale = libm::fmax(1.0, libm::fabs(m[(i, j)]));
            if residual > SYMMETRY_TOL * scale && worst.map_or(true, |(_, _, r)| residual > r) {
                worst = Some((i, j, residual));
            }
        }
    }
    if let Some((row, col, residual)) = worst {
        violations.push(Violation::Asymmetric { row, col, residual });
    }

    let mut max_xp = 0.0f64;
    for i in 0..state.n_modes() {
        for j in 0..state.n_modes() {
            max_xp = max_xp.max(libm::fabs(m[(2 * i, 2 * j + 1)]));
        }
    }
    if max_xp > XP_WARN_TOL {
        warnings.push(format!("x-p correlations up to {max_xp:e} present"));
    }

    let min_nu = match symplectic_spectrum(state) {
        Ok(spec) => {
            let min = spec.first().copied().unwrap_or(f64::INFINITY);
            if min < 1.0 - physicality_tol {
                violations.push(Violation::Unphysical {
                    min_symplectic_eigenvalue: min,
                });
            }
            Some(min)
        }
        Err(e) => {
            violations.push(Violation::SpectrumUnavailable(format!("{e}")));
            None
        }
    };

    ValidationReport {
        symmetry_residual,
        min_symplectic_eigenvalue: min_nu,
        max_xp_correlation: max_xp,
        violations,
        warnings,
    }
}

/// Direct sum `γ ⊕ I_{2k}`: `k` vacuum ancillas appended after the existing
/// modes.
pub fn embed_vacuum(state: &CovarianceState, k: usize) -> Result<CovarianceState> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "embed_vacuum needs at least one ancilla".into(),
        ));
    }
    let old = state.matrix().nrows();
    let dim = old + 2 * k;
    let mut m = DMatrix::identity(dim, dim);
    m.view_mut((0, 0), (old, old)).copy_from(state.matrix());
    let labels = state.labels().map(|l| {
        let mut l = l.to_vec();
        l.extend((0..k).map(|i| format!("vac{i}")));
        l
    });
    Ok(CovarianceState::from_parts(m, labels))
}

/// Principal submatrix on `keep`, in the order given.
pub fn restrict(state: &CovarianceState, keep: &[usize]) -> Result<CovarianceState> {
    if keep.is_empty() {
        return Err(Error::InvalidParameter(
            "restrict needs at least one mode".into(),
        ));
    }
    for &k in keep {
        state.check_mode(k)?;
    }
    let rows: Vec<usize> = keep.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
    let src = state.matrix();
    let m = DMatrix::from_fn(rows.len(), rows.len(), |r, c| src[(rows[r], rows[c])]);
    let labels = state
        .labels()
        .map(|l| keep.iter().map(|&k| l[k].clone()).collect());
    Ok(CovarianceState::from_parts(m, labels))
}
