//! Independent oracles shared by the integration tests and the acceptance
//! harness. Nothing here calls into the library's numerics: densities are
//! written out from their definitions and integrated on dense grids.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use probit_da::{PriorSpec, ProbitData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn std_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn phi(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn big_phi(t: f64) -> f64 {
    0.5 * erfc(-t / std::f64::consts::SQRT_2)
}

/// Sample mean and the standard error of that mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Composite Simpson rule with `2k` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let n = 2 * k;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// A tabulated CDF built by cumulative trapezoid on a uniform grid.
pub struct GridCdf {
    lo: f64,
    h: f64,
    cdf: Vec<f64>,
}

impl GridCdf {
    /// `ln_density` need not be normalized.
    pub fn new(ln_density: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Self {
        let h = (hi - lo) / (points - 1) as f64;
        let logs: Vec<f64> = (0..points).map(|i| ln_density(lo + i as f64 * h)).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dens: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let mut cdf = vec![0.0; points];
        for i in 1..points {
            cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
        }
        let total = cdf[points - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        GridCdf { lo, h, cdf }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.lo) / self.h;
        if t <= 0.0 {
            return 0.0;
        }
        let i = t.floor() as usize;
        if i + 1 >= self.cdf.len() {
            return 1.0;
        }
        let frac = t - i as f64;
        self.cdf[i] * (1.0 - frac) + self.cdf[i + 1] * frac
    }
}

/// Kolmogorov–Smirnov sup-distance between a sample and a CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Random `n × p` design with standard normal entries times `scale`.
pub fn random_design<R: Rng>(rng: &mut R, n: usize, p: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| scale * std_normal(rng))
}

/// Random response drawn from the probit model at a random `β`.
pub fn random_response<R: Rng>(rng: &mut R, x: &DMatrix<f64>) -> Vec<f64> {
    let beta = DVector::from_fn(x.ncols(), |_, _| std_normal(rng));
    let eta = x * beta;
    eta.iter()
        .map(|&e| if e + std_normal(rng) > 0.0 { 1.0 } else { 0.0 })
        .collect()
}

/// Random symmetric positive-definite `p × p` matrix with eigenvalues
/// bounded below by `floor`.
pub fn random_spd<R: Rng>(rng: &mut R, p: usize, floor: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(p, p, |_, _| std_normal(rng));
    m.transpose() * &m / p as f64 + DMatrix::identity(p, p) * floor
}

pub fn random_proper_problem<R: Rng>(rng: &mut R, n: usize, p: usize) -> (ProbitData, PriorSpec) {
    let x = random_design(rng, n, p, 1.0);
    let y = random_response(rng, &x);
    let q = random_spd(rng, p, 0.2);
    let v = DVector::from_fn(p, |_, _| 0.5 * std_normal(rng));
    (ProbitData::new(x, &y).unwrap(), PriorSpec::ProperNormal { q, v })
}

/// Log posterior density (up to a constant) of a one-coordinate problem
/// with prior `N(v/q, 1/q)`, written straight from the likelihood.
pub fn ln_posterior_1d(x: &[f64], y: &[bool], q: f64, v: f64, beta: f64) -> f64 {
    let mut l = -0.5 * q * beta * beta + v * beta;
    for (&xi, &yi) in x.iter().zip(y) {
        let eta = xi * beta;
        l += big_phi(if yi { eta } else { -eta }).ln();
    }
    l
}

/// Posterior mean and second moment of a one-coordinate problem by
/// Simpson's rule over the region where the density is within `e^-60` of
/// its maximum.
pub fn posterior_moments_1d(x: &[f64], y: &[bool], q: f64, v: f64) -> (f64, f64) {
    let lp = |b: f64| ln_posterior_1d(x, y, q, v, b);
    // With q = 0 (flat prior) scan a fixed window around the origin.
    let (centre, sd) = if q > 0.0 { (v / q, 1.0 / q.sqrt()) } else { (0.0, 10.0) };
    let (lo0, hi0) = (centre - 60.0 * sd, centre + 60.0 * sd);
    let coarse = 200_000;
    let h = (hi0 - lo0) / coarse as f64;
    let vals: Vec<f64> = (0..=coarse).map(|i| lp(lo0 + i as f64 * h)).collect();
    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = vals.iter().position(|&l| l > top - 60.0).unwrap();
    let last = vals.iter().rposition(|&l| l > top - 60.0).unwrap();
    let (lo, hi) = (lo0 + first.saturating_sub(1) as f64 * h, lo0 + (last + 1) as f64 * h);
    let k = 50_000;
    let z = simpson(|b| (lp(b) - top).exp(), lo, hi, k);
    let m1 = simpson(|b| b * (lp(b) - top).exp(), lo, hi, k) / z;
    let m2 = simpson(|b| b * b * (lp(b) - top).exp(), lo, hi, k) / z;
    (m1, m2)
}
