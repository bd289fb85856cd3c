use alloc::format;

use super::student_t::two_sided_t_quantile;
use crate::{Error, Result};

/// Ordinary least-squares line `K(x) = a + b x` with prediction bands
/// `K(x) ± t √(s² + X Cov Xᵀ)`, `X = (1, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub intercept: f64,
    pub slope: f64,
    /// Covariance of `(intercept, slope)`.
    pub cov: [[f64; 2]; 2],
    /// Residual mean square, `SSR / (n − 2)`.
    pub s2: f64,
    pub t_quantile: f64,
    pub confidence: f64,
    pub n_points: usize,
    pub x_mean: f64,
}

impl FitResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    pub fn half_width(&self, x: f64) -> f64 {
        let c = &self.cov;
        let xcx = c[0][0] + 2.0 * x * c[0][1] + x * x * c[1][1];
        self.t_quantile * libm::sqrt(libm::fmax(self.s2 + xcx, 0.0))
    }

    /// `(lower, upper)` prediction band at `x`.
    pub fn band(&self, x: f64) -> (f64, f64) {
        let k = self.predict(x);
        let w = self.half_width(x);
        (k - w, k + w)
    }
}

pub fn linear_fit_prediction_bands(points: &[(f64, f64)], confidence: f64) -> Result<FitResult> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateFit(format!("{n} points, need at least 3")));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateFit("non-finite point".into()));
    }
    let nf = n as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - x_mean) * (p.0 - x_mean)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - x_mean) * (p.1 - y_mean)).sum();
    let scale = points.iter().map(|p| libm::fabs(p.0)).fold(1.0, f64::max);
    if !(sxx > 1e-24 * scale * scale * nf) {
        return Err(Error::DegenerateFit(
            "abscissae are (nearly) identical".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let s2 = ssr / (nf - 2.0);
    // s² (XᵀX)⁻¹ written through the centred sums.
    let var_b = s2 / sxx;
    let cov = [
        [s2 / nf + x_mean * x_mean * var_b, -x_mean * var_b],
        [-x_mean * var_b, var_b],
    ];
    let t_quantile = two_sided_t_quantile(confidence, nf - 2.0)?;
    Ok(FitResult {
        intercept,
        slope,
        cov,
        s2,
        t_quantile,
        confidence,
        n_points: n,
        x_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exact_line_has_zero_width() {
        let pts: Vec<_> = (1..=8)
            .map(|k| (k as f64, -0.05 + 0.03 * k as f64))
            .collect();
        let f = linear_fit_prediction_bands(&pts, 0.95).unwrap();
        assert!((f.slope - 0.03).abs() < 1e-14);
        assert!((f.intercept + 0.05).abs() < 1e-14);
        assert!(f.s2 < 1e-30);
        let (lo, hi) = f.band(25.0);
        assert!((hi - lo).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(linear_fit_prediction_bands(&[(1.0, 1.0), (2.0, 2.0)], 0.95).is_err());
        assert!(linear_fit_prediction_bands(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], 0.95).is_err());
    }

    #[test]
    fn band_grows_away_from_centroid() {
        let pts = [
            (1.0, 0.1),
            (2.0, 0.25),
            (3.0, 0.28),
            (4.0, 0.45),
            (5.0, 0.48),
        ];
        let f = linear_fit_prediction_bands(&pts, 0.95).unwrap();
        let w0 = f.half_width(f.x_mean);
        assert!(f.half_width(f.x_mean + 1.0) > w0);
        assert!(f.half_width(f.x_mean - 1.0) > w0);
        assert!(f.half_width(50.0) > f.half_width(25.0));
        let (lo, hi) = f.band(7.0);
        assert!((0.5 * (lo + hi) - f.predict(7.0)).abs() < 1e-14);
    }
}
