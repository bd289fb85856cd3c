//! Closed-form two-mode reference: a two-mode squeezed vacuum of variance
//! `v` whose second mode goes through a pure-loss channel, evaluated from
//! the two-mode formulas directly without any matrix machinery.

pub fn g(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).log2() - x * x.log2()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PairValues {
    pub mi: f64,
    pub holevo: f64,
}

impl PairValues {
    pub fn key(&self, beta: f64) -> f64 {
        (beta * self.mi - self.holevo).max(0.0)
    }
}

/// Alice keeps her mode, Bob's mode has transmittance `t`, and Eve holds
/// the purification of the whole two-mode state.
pub fn tmsv_through_loss(v: f64, t: f64) -> PairValues {
    let va = v;
    let vb = t * v + 1.0 - t;
    let c2 = t * (v * v - 1.0);
    let mi = (va * vb / (va * vb - c2)).log2();
    let delta = va * va + vb * vb - 2.0 * c2;
    let det = va * vb - c2;
    let disc = (delta * delta - 4.0 * det * det).max(0.0).sqrt();
    let nu_plus = ((delta + disc) / 2.0).sqrt();
    let nu_minus = ((delta - disc) / 2.0).max(1.0).sqrt();
    // Alice's conditional variance after Bob's homodyne.
    let nu_cond = (va * (va - c2 / vb)).sqrt();
    let holevo = g((nu_plus - 1.0) / 2.0) + g((nu_minus - 1.0) / 2.0) - g((nu_cond - 1.0) / 2.0);
    PairValues { mi, holevo }
}
