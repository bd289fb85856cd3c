//! Student-t quantiles through the inverse of the regularized incomplete
//! beta function.

use crate::{Error, Result};

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Solves `I_x(a, b) = p` for `x` by bisection; `I_x` is monotone in `x`.
pub fn inverse_regularized_incomplete_beta(p: f64, a: f64, b: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if regularized_incomplete_beta(mid, a, b) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Critical value `t` with `P(|T| ≤ t) = confidence` for `df` degrees of
/// freedom.
///
/// Uses `P(|T| ≤ t) = I_y(1/2, df/2)` with `y = t²/(df + t²)`.
pub fn two_sided_t_quantile(confidence: f64, df: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    if !(df > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "degrees of freedom {df} must be > 0"
        )));
    }
    let y = inverse_regularized_incomplete_beta(confidence, 0.5, 0.5 * df);
    Ok(libm::sqrt(df * y / (1.0 - y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_special_cases() {
        // I_x(1, 1) = x, I_x(a, 1) = x^a.
        for x in [0.1, 0.5, 0.9] {
            assert!((regularized_incomplete_beta(x, 1.0, 1.0) - x).abs() < 1e-14);
            assert!((regularized_incomplete_beta(x, 3.0, 1.0) - x * x * x).abs() < 1e-14);
        }
        assert_eq!(regularized_incomplete_beta(0.0, 2.0, 3.0), 0.0);
        assert_eq!(regularized_incomplete_beta(1.0, 2.0, 3.0), 1.0);
    }

    #[test]
    fn inverse_round_trips() {
        for &(a, b) in &[(0.5, 3.0), (2.0, 5.0), (10.0, 0.5)] {
            for p in [0.01, 0.3, 0.95] {
                let x = inverse_regularized_incomplete_beta(p, a, b);
                assert!((regularized_incomplete_beta(x, a, b) - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cauchy_quantile() {
        // df = 1 is Cauchy: two-sided 50% point is tan(π/4) = 1.
        assert!((two_sided_t_quantile(0.5, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn six_degrees_of_freedom() {
        let t = two_sided_t_quantile(0.95, 6.0).unwrap();
        assert!((t - 2.447).abs() < 1e-3, "{t}");
        assert!(two_sided_t_quantile(1.0, 6.0).is_err());
        assert!(two_sided_t_quantile(0.95, 0.0).is_err());
    }
}
