//! Limited-memory quasi-Newton minimisation inside a box.
//!
//! Projected variant of L-BFGS-B: variables sitting on a bound with the
//! gradient pushing outward are frozen for the step, the two-loop recursion
//! supplies the direction on the free ones, and a backtracking Armijo search
//! runs along the projected path `P(x + α d)`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A differentiable function to minimise.
pub trait BoxProblem {
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxMinimizerOptions {
    /// Number of stored curvature pairs.
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop when `(f_k − f_{k+1}) ≤ ftol · max(1, |f_k|)`.
    pub ftol: f64,
    /// Stop when the projected gradient's max-norm falls below this.
    pub pgtol: f64,
}

impl Default for BoxMinimizerOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iterations: 500,
            ftol: 1e-10,
            pgtol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxMinimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

pub fn minimize_in_box<P: BoxProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    lower: f64,
    upper: f64,
    opts: &BoxMinimizerOptions,
) -> Result<BoxMinimum> {
    let project = |x: &mut [f64]| {
        for v in x.iter_mut() {
            *v = v.clamp(lower, upper);
        }
    };
    let mut x = x0.to_vec();
    project(&mut x);
    let mut f = problem.value(&x)?;
    if !f.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    let mut g = problem.gradient(&x)?;
    let mut evaluations = 1;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        let free: Vec<bool> = x
            .iter()
            .zip(&g)
            .map(|(&xi, &gi)| !((xi <= lower && gi > 0.0) || (xi >= upper && gi < 0.0)))
            .collect();
        let pg = g
            .iter()
            .zip(&free)
            .map(|(&gi, &fr)| if fr { libm::fabs(gi) } else { 0.0 })
            .fold(0.0, f64::max);
        if pg <= opts.pgtol {
            converged = true;
            break;
        }
        iterations += 1;

        let masked: Vec<f64> = g
            .iter()
            .zip(&free)
            .map(|(&gi, &fr)| if fr { gi } else { 0.0 })
            .collect();
        let mut d = two_loop(&masked, &memory);
        for (di, &fr) in d.iter_mut().zip(&free) {
            if !fr {
                *di = 0.0;
            }
            *di = -*di;
        }
        if dot(&d, &g) >= 0.0 {
            memory.clear();
            d = masked.iter().map(|v| -v).collect();
        }

        let dmax = d.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        let mut alpha = if memory.is_empty() {
            libm::fmin(1.0, 0.25 / dmax)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            project(&mut xn);
            let step: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            if step.iter().all(|s| *s == 0.0) {
                break;
            }
            let fnew = problem.value(&xn)?;
            evaluations += 1;
            if !fnew.is_finite() {
                return Err(Error::NonFinite {
                    iteration: iterations,
                });
            }
            if fnew <= f + ARMIJO * dot(&g, &step) {
                accepted = Some((xn, fnew, step));
                break;
            }
            alpha *= 0.5;
        }

        let Some((xn, fnew, s)) = accepted else {
            if memory.is_empty() {
                // Steepest descent made no progress either: stationary to
                // within the resolution of the gradient.
                converged = true;
                break;
            }
            memory.clear();
            continue;
        };

        let gn = problem.gradient(&xn)?;
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * libm::sqrt(dot(&s, &s) * dot(&y, &y)) {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }

        let decrease = f - fnew;
        let scale = libm::fmax(1.0, libm::fabs(f));
        x = xn;
        f = fnew;
        g = gn;
        if decrease <= opts.ftol * scale {
            converged = true;
            break;
        }
    }

    Ok(BoxMinimum {
        x,
        value: f,
        iterations,
        evaluations,
        converged,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `H g` for the inverse-Hessian approximation held in `memory`.
fn two_loop(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = vec![0.0; memory.len()];
    for (k, (s, y, rho)) in memory.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        alphas[k] = a;
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for (k, (s, y, rho)) in memory.iter().enumerate() {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (alphas[k] - b) * si;
        }
    }
    q
}
