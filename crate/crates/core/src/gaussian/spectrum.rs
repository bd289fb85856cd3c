use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{CovarianceState, SymplecticForm};
use crate::{Error, Result};

/// Symplectic eigenvalues `ν_1 ≤ … ≤ ν_N` of a covariance matrix.
///
/// The values are the moduli of the eigenvalues of `iΩγ`, each taken once.
/// For positive-definite `γ = L Lᵀ` the real symmetric matrix
/// `−(Lᵀ Ω L)²`, which is similar to `−(Ωγ)²`, is diagonalised and the
/// doubled spectrum is collapsed pairwise. Indefinite input falls back to a
/// real Schur decomposition of `−(Ωγ)²`. Values below 1 are returned as is.
pub fn symplectic_spectrum(state: &CovarianceState) -> Result<Vec<f64>> {
    let n = state.n_modes();
    let omega = SymplecticForm::new(n);
    let gamma = state.matrix();

    let mut squared: Vec<f64> = match gamma.clone().cholesky() {
        Some(chol) => {
            let l = chol.l();
            let a = l.transpose() * omega.matrix() * &l;
            let m = a.transpose() * &a;
            SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
        }
        None => general_squared(gamma, omega.matrix())?,
    };
    squared.sort_by(f64::total_cmp);

    Ok(squared
        .chunks_exact(2)
        .map(|p| libm::sqrt(libm::fabs(0.5 * (p[0] + p[1]))))
        .collect())
}

fn general_squared(gamma: &DMatrix<f64>, omega: &DMatrix<f64>) -> Result<Vec<f64>> {
    let og = omega * gamma;
    let m = -(&og * &og);
    let dim = m.nrows();
    let schur = nalgebra::Schur::try_new(m, f64::EPSILON, 1000).ok_or_else(|| {
        let diag = gamma.diagonal();
        Error::EigenSolver {
            dim,
            min_diag: diag.min(),
            max_diag: diag.max(),
        }
    })?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| libm::hypot(z.re, z.im))
        .collect())
}
