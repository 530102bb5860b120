use serde::{Deserialize, Serialize};

use super::{diagnose, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::samplers::SampleMatrix;

/// Direction tested for the sandwich variance comparison.
pub const VARIANCE_NOTE: &str = "The sandwich chain's asymptotic variance is expected to be no larger than \
the DA chain's. One published display writes the inequality the other way round; the prose direction \
(sandwich <= DA) is the one checked here. Operator spectra are not computed; the batch-means variance \
is used as a proxy.";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub label: String,
    pub report: DiagnosticsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateComparison {
    pub coordinate: usize,
    /// Labels sorted by increasing lag-1 autocorrelation.
    pub lag1_order: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDifference {
    pub a: String,
    pub b: String,
    /// Per coordinate, `a − b`.
    pub lag1_acf: Vec<f64>,
    pub mean: Vec<f64>,
    pub sigma2_hat: Vec<f64>,
    /// Per coordinate, the largest absolute ACF difference over all lags.
    pub max_abs_acf: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub max_lag: usize,
    pub runs: Vec<RunDiagnostics>,
    pub coordinates: Vec<CoordinateComparison>,
    pub pairwise: Vec<PairwiseDifference>,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    pub fn run(&self, label: &str) -> Option<&DiagnosticsReport> {
        self.runs.iter().find(|r| r.label == label).map(|r| &r.report)
    }
}

/// Diagnoses each labelled run and lines them up against each other.
pub fn compare_chains(runs: &[(String, SampleMatrix)], max_lag: usize) -> Result<ComparisonReport> {
    let p = runs.first().map_or(0, |(_, s)| s.p());
    if let Some((label, s)) = runs.iter().find(|(_, s)| s.p() != p) {
        return Err(Error::DimensionMismatch(format!(
            "run {label:?} has p = {}, expected {p}",
            s.p()
        )));
    }
    let max_lag = runs
        .iter()
        .map(|(_, s)| s.rows().saturating_sub(2))
        .fold(max_lag, usize::min);
    let diagnosed = runs
        .iter()
        .map(|(label, s)| {
            Ok(RunDiagnostics {
                label: label.clone(),
                report: diagnose(s, max_lag)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let coordinates = (0..p)
        .map(|j| {
            let mut order: Vec<&RunDiagnostics> = diagnosed.iter().collect();
            order.sort_by(|a, b| a.report.acf[j][1].total_cmp(&b.report.acf[j][1]));
            CoordinateComparison {
                coordinate: j,
                lag1_order: order.into_iter().map(|r| r.label.clone()).collect(),
            }
        })
        .collect();

    let mut pairwise = Vec::new();
    for (i, a) in diagnosed.iter().enumerate() {
        for b in &diagnosed[i + 1..] {
            let (ra, rb) = (&a.report, &b.report);
            pairwise.push(PairwiseDifference {
                a: a.label.clone(),
                b: b.label.clone(),
                lag1_acf: (0..p).map(|j| ra.acf[j][1] - rb.acf[j][1]).collect(),
                mean: (0..p).map(|j| ra.mean[j] - rb.mean[j]).collect(),
                sigma2_hat: (0..p).map(|j| ra.sigma2_hat[j] - rb.sigma2_hat[j]).collect(),
                max_abs_acf: (0..p)
                    .map(|j| {
                        ra.acf[j]
                            .iter()
                            .zip(&rb.acf[j])
                            .map(|(x, y)| (x - y).abs())
                            .fold(0.0, f64::max)
                    })
                    .collect(),
            });
        }
    }

    Ok(ComparisonReport {
        max_lag,
        runs: diagnosed,
        coordinates,
        pairwise,
        notes: vec![VARIANCE_NOTE.to_string()],
    })
}
