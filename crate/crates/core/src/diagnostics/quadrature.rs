//! Deterministic posterior moments for `p ≤ 2`, used as a ground truth for
//! the samplers.
//!
//! The unnormalized log posterior
//! `−½βᵀQβ + vᵀβ + Σ ln Φ(sᵢ xᵢᵀβ)` (`sᵢ = ±1` by response) is log-concave, so
//! the integration range is found by walking out from the mode until the
//! density has dropped by `e^{-40}`, then integrated with adaptive
//! Gauss–Kronrod (7/15). Two-dimensional problems nest the one-dimensional
//! rule, locating the conditional mode of `β₂ | β₁` at every outer node.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{PriorSpec, ProbitData};
use crate::normal;
use crate::theory::chen_shao_check;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Log-density drop that ends the integration range.
const LOG_DROP: f64 = -40.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Target relative error of every integral.
    pub rel_tol: f64,
    /// Initial panels per local standard deviation.
    pub panels_per_sd: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-10,
            panels_per_sd: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorMoments {
    pub mean: DVector<f64>,
    /// `E[ββᵀ]`.
    pub second_moment: DMatrix<f64>,
}

impl PosteriorMoments {
    pub fn variance(&self, j: usize) -> f64 {
        self.second_moment[(j, j)] - self.mean[j] * self.mean[j]
    }
}

fn gk15<const K: usize>(f: &mut impl FnMut(f64) -> [f64; K], a: f64, b: f64) -> ([f64; K], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; K];
    let mut gauss0 = 0.0;
    for (i, (&x, &w)) in XGK.iter().zip(&WGK).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sign in nodes {
            let fx = f(c + sign * h * x);
            for k in 0..K {
                kron[k] += w * fx[k];
            }
            if i % 2 == 1 {
                gauss0 += WG[i / 2] * fx[0];
            }
        }
    }
    for v in kron.iter_mut() {
        *v *= h;
    }
    let err = (kron[0] - gauss0 * h).abs();
    (kron, err)
}

/// Adaptive integration over consecutive `breaks`; the error control looks
/// at component 0.
fn integrate<const K: usize>(f: &mut impl FnMut(f64) -> [f64; K], breaks: &[f64], rel_tol: f64) -> [f64; K] {
    let mut panels: Vec<(f64, f64, [f64; K], f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    for _ in 0..20_000 {
        let total: f64 = panels.iter().map(|p| p.2[0]).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() {
            break;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (a, b, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            break;
        }
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (v, e) = gk15(f, lo, hi);
            panels.push((lo, hi, v, e));
        }
    }
    let mut out = [0.0; K];
    for p in &panels {
        for (o, v) in out.iter_mut().zip(&p.2) {
            *o += v;
        }
    }
    out
}

/// Walks out from `center` in doubling steps until `log_f` has dropped by
/// `e^{-40}` relative to `log_f(center)`; valid for log-concave `f`.
fn tail_range(log_f: &mut impl FnMut(f64) -> f64, center: f64, scale: f64) -> (f64, f64) {
    let top = log_f(center);
    let mut out = [center, center];
    for (slot, dir) in out.iter_mut().zip([-1.0, 1.0]) {
        let mut step = scale;
        loop {
            let x = center + dir * step;
            if log_f(x) < top + LOG_DROP || step > 1e8 * scale {
                *slot = x;
                break;
            }
            step *= 2.0;
        }
    }
    (out[0], out[1])
}

fn panel_breaks(lo: f64, hi: f64, sd: f64, opts: &QuadratureOptions) -> Vec<f64> {
    let count = (((hi - lo) / sd) * opts.panels_per_sd).ceil().clamp(4.0, 2000.0) as usize;
    (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect()
}

/// Unnormalized log posterior and its derivatives.
struct LogPosterior {
    /// Rows `sᵢ xᵢᵀ`.
    signed_x: DMatrix<f64>,
    q: DMatrix<f64>,
    v: DVector<f64>,
}

impl LogPosterior {
    fn value(&self, beta: &DVector<f64>) -> f64 {
        let t = &self.signed_x * beta;
        -0.5 * beta.dot(&(&self.q * beta)) + self.v.dot(beta) + t.iter().map(|&ti| normal::ln_cdf(ti)).sum::<f64>()
    }

    fn grad_hess(&self, beta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let t = &self.signed_x * beta;
        let mut grad = -(&self.q * beta) + &self.v;
        let mut hess = -self.q.clone();
        for (i, &ti) in t.iter().enumerate() {
            let lam = normal::inv_mills(ti);
            let row = self.signed_x.row(i);
            grad += row.transpose() * lam;
            hess -= row.transpose() * row * (lam * (ti + lam));
        }
        (grad, hess)
    }

    fn mode(&self, start: DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let mut beta = start;
        let mut f = self.value(&beta);
        for _ in 0..500 {
            let (g, h) = self.grad_hess(&beta);
            let neg_h = -h;
            let chol = neg_h.clone().cholesky().ok_or(Error::ImproperPosterior)?;
            let step = chol.solve(&g);
            let decrement = g.dot(&step);
            if decrement < 1e-20 {
                return Ok((beta, neg_h));
            }
            let mut t = 1.0;
            loop {
                let cand = &beta + &step * t;
                let fc = self.value(&cand);
                if fc >= f + 1e-4 * t * decrement || t < 1e-12 {
                    beta = cand;
                    f = fc;
                    break;
                }
                t *= 0.5;
            }
        }
        let (_, h) = self.grad_hess(&beta);
        Ok((beta, -h))
    }
}

/// Posterior mean and second moment with default options.
pub fn quadrature_posterior_moments(data: &ProbitData, prior: &PriorSpec) -> Result<PosteriorMoments> {
    quadrature_posterior_moments_with(data, prior, &QuadratureOptions::default())
}

pub fn quadrature_posterior_moments_with(
    data: &ProbitData,
    prior: &PriorSpec,
    opts: &QuadratureOptions,
) -> Result<PosteriorMoments> {
    let p = data.p();
    if p > 2 {
        return Err(Error::DimensionTooLarge(p));
    }
    if matches!(prior, PriorSpec::ImproperFlat) && !chen_shao_check(data).proper {
        return Err(Error::ImproperPosterior);
    }
    let (q, v) = prior.resolve(data)?;

    if data.n() == 0 {
        let chol = q.clone().cholesky().ok_or(Error::CholeskyFailure("prior precision Q"))?;
        let mean = chol.solve(&v);
        let second_moment = chol.inverse() + &mean * mean.transpose();
        return Ok(PosteriorMoments { mean, second_moment });
    }

    let mut signed_x = data.x().clone();
    for (i, &yi) in data.y().iter().enumerate() {
        if !yi {
            signed_x.row_mut(i).neg_mut();
        }
    }
    let lp = LogPosterior { signed_x, q, v };
    let (mode, neg_h) = lp.mode(DVector::zeros(p))?;
    let cov = neg_h.clone().try_inverse().ok_or(Error::ImproperPosterior)?;
    let top = lp.value(&mode);

    // Include the ±10 prior standard deviation box when the prior is proper.
    let prior_box = |j: usize| -> Option<(f64, f64)> {
        let chol = lp.q.clone().cholesky()?;
        let qinv = chol.inverse();
        let m = chol.solve(&lp.v);
        let sd = qinv[(j, j)].sqrt();
        Some((m[j] - 10.0 * sd, m[j] + 10.0 * sd))
    };
    let widen = |(lo, hi): (f64, f64), j: usize| match prior_box(j) {
        Some((a, b)) => (lo.min(a), hi.max(b)),
        None => (lo, hi),
    };

    if p == 1 {
        let sd = cov[(0, 0)].sqrt();
        let mut log_f = |b: f64| lp.value(&DVector::from_element(1, b)) - top;
        let range = widen(tail_range(&mut log_f, mode[0], sd), 0);
        let breaks = panel_breaks(range.0, range.1, sd, opts);
        let mut f = |b: f64| {
            let w = log_f(b).exp();
            [w, b * w, b * b * w]
        };
        let r = integrate(&mut f, &breaks, opts.rel_tol);
        return Ok(PosteriorMoments {
            mean: DVector::from_element(1, r[1] / r[0]),
            second_moment: DMatrix::from_element(1, 1, r[2] / r[0]),
        });
    }

    // p == 2: inner integral over β₂ for each β₁.
    let inner = |b1: f64| -> [f64; 3] {
        let point = |b2: f64| DVector::from_vec(vec![b1, b2]);
        let mut b2 = mode[1];
        for _ in 0..100 {
            let (g, h) = lp.grad_hess(&point(b2));
            let step = -g[1] / h[(1, 1)];
            b2 += step;
            if step.abs() < 1e-12 * (1.0 + b2.abs()) {
                break;
            }
        }
        let sd = (-1.0 / lp.grad_hess(&point(b2)).1[(1, 1)]).sqrt();
        let mut log_f = |x: f64| lp.value(&point(x)) - top;
        let range = widen(tail_range(&mut log_f, b2, sd), 1);
        let breaks = panel_breaks(range.0, range.1, sd, opts);
        let mut f = |x: f64| {
            let w = log_f(x).exp();
            [w, x * w, x * x * w]
        };
        integrate(&mut f, &breaks, opts.rel_tol)
    };
    let sd1 = cov[(0, 0)].sqrt();
    let mut log_marginal = |b1: f64| inner(b1)[0].ln();
    let range = widen(tail_range(&mut log_marginal, mode[0], sd1), 0);
    let breaks = panel_breaks(range.0, range.1, sd1, opts);
    let mut outer = |b1: f64| {
        let [i0, i1, i2] = inner(b1);
        [i0, b1 * i0, b1 * b1 * i0, i1, b1 * i1, i2]
    };
    let r = integrate(&mut outer, &breaks, opts.rel_tol);
    let z = r[0];
    Ok(PosteriorMoments {
        mean: DVector::from_vec(vec![r[1] / z, r[3] / z]),
        second_moment: DMatrix::from_row_slice(2, 2, &[r[2] / z, r[4] / z, r[4] / z, r[5] / z]),
    })
}
