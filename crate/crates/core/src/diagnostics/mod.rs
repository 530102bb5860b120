//! Chain-quality diagnostics: autocorrelations, running means, batch-means
//! asymptotic variance, and the multi-chain comparison report.

mod compare;
mod quadrature;

pub use compare::{compare_chains, ComparisonReport, CoordinateComparison, PairwiseDifference, RunDiagnostics};
pub use quadrature::{quadrature_posterior_moments, quadrature_posterior_moments_with, PosteriorMoments, QuadratureOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::SampleMatrix;

/// Maximum lag reported when the caller does not choose one.
pub const DEFAULT_MAX_LAG: usize = 50;

/// Running means are stored at most this many times per chain.
pub const RUNNING_MEAN_CHECKPOINTS: usize = 2000;

fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

fn is_constant(series: &[f64]) -> bool {
    series.iter().all(|&x| x == series[0])
}

/// Sample autocorrelations `r_0..=r_max_lag` with the biased (divide by `m`)
/// autocovariance, so `r_0 = 1`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let m = series.len();
    if m <= max_lag + 1 {
        return Err(Error::TooShort {
            len: m,
            needed: max_lag + 2,
        });
    }
    if is_constant(series) {
        return Err(Error::ConstantSeries);
    }
    let mu = mean(series);
    let centered: Vec<f64> = series.iter().map(|x| x - mu).collect();
    let c0: f64 = centered.iter().map(|d| d * d).sum();
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::ConstantSeries);
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    acf.push(1.0);
    for k in 1..=max_lag {
        let ck: f64 = centered[..m - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum();
        acf.push(ck / c0);
    }
    Ok(acf)
}

/// `out[k]` is the mean of `series[..=k]`.
pub fn running_mean(series: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    series
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            sum += x;
            sum / (k + 1) as f64
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchMeans {
    /// Estimate of the asymptotic variance `σ²` in `√m (ḡ_m − E g) → N(0, σ²)`.
    pub sigma2_hat: f64,
    pub ess: f64,
    pub batches: usize,
    pub batch_size: usize,
}

impl BatchMeans {
    /// Monte Carlo standard error of the series mean.
    pub fn standard_error(&self, m: usize) -> f64 {
        (self.sigma2_hat / m as f64).sqrt()
    }
}

/// Minimum series length accepted by [`batch_means`].
pub const BATCH_MEANS_MIN_LEN: usize = 100;

/// Non-overlapping batch means with `⌊√m⌋` batches of equal size; any
/// remainder at the start of the series is dropped.
pub fn batch_means(series: &[f64]) -> Result<BatchMeans> {
    let m = series.len();
    if m < BATCH_MEANS_MIN_LEN {
        return Err(Error::TooShort {
            len: m,
            needed: BATCH_MEANS_MIN_LEN,
        });
    }
    if is_constant(series) {
        return Err(Error::ConstantSeries);
    }
    let batches = (m as f64).sqrt().floor() as usize;
    let batch_size = m / batches;
    let used = &series[m - batches * batch_size..];
    let means: Vec<f64> = used.chunks_exact(batch_size).map(mean).collect();
    let grand = mean(&means);
    let var_means = means.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let sigma2_hat = batch_size as f64 * var_means;
    let mu = mean(series);
    let var = series.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1) as f64;
    Ok(BatchMeans {
        sigma2_hat,
        ess: m as f64 * var / sigma2_hat,
        batches,
        batch_size,
    })
}

/// Indices at which running means are stored: every `max(1, m / 2000)`-th
/// iteration, always including the last.
pub fn checkpoint_indices(m: usize) -> Vec<usize> {
    let stride = (m / RUNNING_MEAN_CHECKPOINTS).max(1);
    let mut idx: Vec<usize> = (stride - 1..m).step_by(stride).collect();
    if m > 0 && idx.last() != Some(&(m - 1)) {
        idx.push(m - 1);
    }
    idx
}

/// Per-coordinate diagnostics of one chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub draws: usize,
    pub acf: Vec<Vec<f64>>,
    /// 1-based iteration numbers (within the kept draws) of `running_means`.
    pub checkpoints: Vec<usize>,
    pub running_means: Vec<Vec<f64>>,
    pub sigma2_hat: Vec<f64>,
    /// Batch-means ESS, capped at the number of draws.
    pub ess: Vec<f64>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

pub fn diagnose(sample: &SampleMatrix, max_lag: usize) -> Result<DiagnosticsReport> {
    let m = sample.rows();
    let max_lag = max_lag.min(m.saturating_sub(2));
    let checkpoints = checkpoint_indices(m);
    let mut report = DiagnosticsReport {
        draws: m,
        acf: Vec::new(),
        checkpoints: checkpoints.iter().map(|k| k + 1).collect(),
        running_means: Vec::new(),
        sigma2_hat: Vec::new(),
        ess: Vec::new(),
        mean: Vec::new(),
        sd: Vec::new(),
    };
    for j in 0..sample.p() {
        let col = sample.column(j);
        report.acf.push(autocorrelation(col, max_lag)?);
        let rm = running_mean(col);
        report.running_means.push(checkpoints.iter().map(|&k| rm[k]).collect());
        let bm = batch_means(col)?;
        report.sigma2_hat.push(bm.sigma2_hat);
        report.ess.push(bm.ess.min(m as f64));
        let mu = mean(col);
        report.mean.push(mu);
        report
            .sd
            .push((col.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt());
    }
    Ok(report)
}
