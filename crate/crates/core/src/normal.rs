//! Standard normal density, distribution function and the inverse Mills
//! ratio, evaluated so that the far tails neither underflow nor divide 0/0.

use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Below this argument `Φ` is evaluated through a continued fraction.
const TAIL_SWITCH: f64 = -8.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

pub fn ln_pdf(t: f64) -> f64 {
    -0.5 * t * t - LN_SQRT_2PI
}

pub fn cdf(t: f64) -> f64 {
    0.5 * erfc(-t * FRAC_1_SQRT_2)
}

/// Upper-tail Mills ratio `(1 - Φ(x)) / φ(x)` for large positive `x`,
/// by backward evaluation of the Laplace continued fraction.
fn upper_mills_cf(x: f64) -> f64 {
    let mut acc = x;
    for k in (1..=80).rev() {
        acc = x + k as f64 / acc;
    }
    1.0 / acc
}

/// `φ(t) / Φ(t)`.
pub fn inv_mills(t: f64) -> f64 {
    if t < TAIL_SWITCH {
        1.0 / upper_mills_cf(-t)
    } else {
        pdf(t) / cdf(t)
    }
}

/// `ln Φ(t)`.
pub fn ln_cdf(t: f64) -> f64 {
    if t < TAIL_SWITCH {
        ln_pdf(t) + upper_mills_cf(-t).ln()
    } else {
        cdf(t).ln()
    }
}

/// Mean and variance of `TN(mu, 1, positive)`: a unit-variance normal
/// restricted to `(0, ∞)` when `positive`, to `(-∞, 0]` otherwise.
pub fn truncated_moments(mu: f64, positive: bool) -> (f64, f64) {
    // Reflect the negative side onto the positive one.
    let xi = if positive { mu } else { -mu };
    let lambda = inv_mills(xi);
    let mean = xi + lambda;
    let var = (1.0 - lambda * (xi + lambda)).max(0.0);
    if positive {
        (mean, var)
    } else {
        (-mean, var)
    }
}

/// Second moment `E U²` of `TN(xi, 1, positive)`.
pub fn truncated_second_moment(xi: f64, positive: bool) -> f64 {
    if positive {
        1.0 + xi * xi + xi * inv_mills(xi)
    } else {
        1.0 + xi * xi - xi * inv_mills(-xi)
    }
}
