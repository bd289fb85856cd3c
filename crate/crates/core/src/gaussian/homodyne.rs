use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{CovarianceState, Quadrature};
use crate::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero
/// when pseudo-inverting the measured block.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

/// Conditional covariance of the unmeasured modes after homodyning all of
/// `measured` jointly in `quadrature`:
///
/// `γ_rem − σ (Π γ_meas Π)⁺ σᵀ`.
///
/// Retained modes keep their relative order. A singular measured block is
/// handled by the pseudo-inverse, never reported as an error.
pub fn condition_on_homodyne(
    state: &CovarianceState,
    measured: &[usize],
    quadrature: Quadrature,
) -> Result<CovarianceState> {
    if measured.is_empty() {
        return Err(Error::InvalidParameter("no measured modes given".into()));
    }
    for &m in measured {
        state.check_mode(m)?;
    }
    let retained: Vec<usize> = (0..state.n_modes())
        .filter(|k| !measured.contains(k))
        .collect();
    if retained.is_empty() {
        return Err(Error::InvalidParameter(
            "conditioning would leave no modes".into(),
        ));
    }

    let g = state.matrix();
    let keep_rows: Vec<usize> = retained.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
    let meas_rows: Vec<usize> = measured.iter().map(|&k| quadrature.row(k)).collect();

    let rem = DMatrix::from_fn(keep_rows.len(), keep_rows.len(), |r, c| {
        g[(keep_rows[r], keep_rows[c])]
    });
    let sigma = DMatrix::from_fn(keep_rows.len(), meas_rows.len(), |r, c| {
        g[(keep_rows[r], meas_rows[c])]
    });
    let block = DMatrix::from_fn(meas_rows.len(), meas_rows.len(), |r, c| {
        g[(meas_rows[r], meas_rows[c])]
    });

    let pinv = symmetric_pinv(block);
    let mut cond = rem - &sigma * pinv * sigma.transpose();
    // Restore exact symmetry lost to rounding in the product.
    let sym = (&cond + cond.transpose()) * 0.5;
    cond.copy_from(&sym);

    let labels = state
        .labels()
        .map(|l| retained.iter().map(|&k| l[k].clone()).collect());
    Ok(CovarianceState::from_parts(cond, labels))
}

fn symmetric_pinv(block: DMatrix<f64>) -> DMatrix<f64> {
    let sym = (&block + block.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let largest = eig.eigenvalues.amax();
    let cutoff = PINV_RELATIVE_CUTOFF * largest;
    let inv = eig
        .eigenvalues
        .map(|v| if libm::fabs(v) > cutoff { 1.0 / v } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmsv(v: f64) -> CovarianceState {
        let c = libm::sqrt(v * v - 1.0);
        #[rustfmt::skip]
        let data = [
            v, 0.0, c, 0.0,
            0.0, v, 0.0, -c,
            c, 0.0, v, 0.0,
            0.0, -c, 0.0, v,
        ];
        CovarianceState::from_row_major(2, &data).unwrap()
    }

    #[test]
    fn uncorrelated_modes_are_untouched() {
        let s = CovarianceState::thermal(&[2.0, 3.0, 5.0]).unwrap();
        let c = condition_on_homodyne(&s, &[1], Quadrature::X).unwrap();
        assert_eq!(c, CovarianceState::thermal(&[2.0, 5.0]).unwrap());
    }

    #[test]
    fn tmsv_conditional_variance() {
        let c = condition_on_homodyne(&tmsv(2.0), &[1], Quadrature::X).unwrap();
        assert!((c.matrix()[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((c.matrix()[(1, 1)] - 2.0).abs() < 1e-14);
        assert_eq!(c.matrix()[(0, 1)], 0.0);
        let c = condition_on_homodyne(&tmsv(2.0), &[1], Quadrature::P).unwrap();
        assert!((c.matrix()[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((c.matrix()[(1, 1)] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn singular_measured_block_is_pseudo_inverted() {
        // Measured x-block is zero: nothing to learn, nothing changes.
        let mut m = DMatrix::identity(4, 4) * 2.0;
        m[(2, 2)] = 0.0;
        let s = CovarianceState::new(m).unwrap();
        let c = condition_on_homodyne(&s, &[1], Quadrature::X).unwrap();
        assert_eq!(c.matrix()[(0, 0)], 2.0);
    }

    #[test]
    fn errors() {
        let s = tmsv(2.0);
        assert!(condition_on_homodyne(&s, &[], Quadrature::X).is_err());
        assert!(condition_on_homodyne(&s, &[0, 1], Quadrature::X).is_err());
        assert!(condition_on_homodyne(&s, &[2], Quadrature::X).is_err());
    }
}
