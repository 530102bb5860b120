//! Analytic quantities behind the convergence guarantees of the AC-DA chain.
//!
//! With drift function `ν(β) = βᵀ(XᵀX + Q)β`, one AC-DA transition satisfies
//!
//! ```text
//! E[ν(β_{m+1}) | β_m = β'] ≤ ρ(c) ν(β') + L(c)
//! ρ(c) = (1 + c²) λ_max
//! L(c) = A1(c) + (1 + c²) A2
//! A1(c) = p + (1 + 1/c²) ‖(XᵀX + Q)^{-1/2} v‖²
//! A2 = n λ_max (1 + Λ)
//! ```
//!
//! where `λ_max` is the largest eigenvalue of `W̃(W̃ᵀW̃ + I)⁻¹W̃ᵀ`, `W̃ = WQ^{-1/2}`
//! and `Λ = sup_{t ≥ 0} t φ(t) / Φ(t)`. Any `c < √(1/λ_max − 1)` gives `ρ < 1`.
//!
//! The trace-class check tests two sufficient conditions, so failing both
//! gives [`Verdict::Unknown`], never a negative answer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_TOL};
use crate::lp::{self, Feasibility};
use crate::model::{sign_transform, PosteriorContext, PriorRegime, PriorSpec, ProbitData};
use crate::normal;

/// Eigenvalues at or above this bound fail the first trace-class condition.
pub const TRACE_CLASS_EIGEN_BOUND: f64 = 3.5;

/// Eigenvalues within this relative distance of the bound are treated as
/// reaching it, so roundoff cannot certify `g = 7/2` itself.
pub const TRACE_CLASS_BOUNDARY_RTOL: f64 = 1e-9;

/// Off-diagonal magnitude below which `XQ^{-1/2}` counts as rectangular diagonal.
pub const RECTANGULAR_DIAGONAL_TOL: f64 = 1e-12;

/// Absolute tolerance of the golden-section search for `Λ`.
pub const MILLS_BOUND_TOL: f64 = 1e-8;

/// Eigenvalues of `B(BᵀB + τI)⁻¹Bᵀ`, largest first, including the
/// `n - rank` zeros.
///
/// With singular values `dᵢ` of `B` these are `dᵢ² / (τ + dᵢ²)`, which lie in
/// `[0, 1)` and are not all zero when `B ≠ 0`.
pub fn shrinkage_eigenvalues(b: &DMatrix<f64>, tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidTau(tau));
    }
    if b.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let mut out: Vec<f64> = linalg::singular_values(b)
        .into_iter()
        .map(|d| {
            let d2 = d * d;
            d2 / (tau + d2)
        })
        .collect();
    out.resize(b.nrows().max(out.len()), 0.0);
    out.truncate(b.nrows());
    Ok(out)
}

/// Largest eigenvalue of `W̃(W̃ᵀW̃ + I)⁻¹W̃ᵀ`.
pub fn lambda_max(ctx: &PosteriorContext) -> Result<f64> {
    let wt = ctx.wtilde().ok_or(Error::ImproperPriorUnsupported)?;
    if ctx.n() == 0 || ctx.data().x().iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroDesign);
    }
    let d = linalg::singular_values(wt)[0];
    let d2 = d * d;
    Ok(d2 / (1.0 + d2))
}

/// `t φ(t) / Φ(t)`, the function whose supremum over `t ≥ 0` is `Λ`.
pub fn mills_term(t: f64) -> f64 {
    t * normal::inv_mills(t)
}

/// `Λ = sup_{u ≤ 0} |u φ(u) / (1 − Φ(u))|`, via `u = −t`.
///
/// Bracketed on a coarse grid over `[0, 10]`, then refined by golden section.
pub fn mills_bound() -> f64 {
    let step = 0.01;
    let (best_i, _) = (0..=1000usize)
        .map(|i| (i, mills_term(i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, h)| if h > acc.1 { (i, h) } else { acc });
    let mut lo = (best_i.saturating_sub(1)) as f64 * step;
    let mut hi = (best_i + 1) as f64 * step;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (mills_term(a), mills_term(b));
    while hi - lo > MILLS_BOUND_TOL {
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = mills_term(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = mills_term(b);
        }
    }
    mills_term(0.5 * (lo + hi)).max(fa).max(fb)
}

/// Constants of the geometric drift inequality at a chosen `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub lambda_max: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub c0: f64,
    pub rho: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub c_used: f64,
}

/// Drift constants at `c`, or at `c0 = ½√(1/λ_max − 1)` when `c` is `None`.
pub fn drift_constants(ctx: &PosteriorContext, c: Option<f64>) -> Result<DriftReport> {
    let lambda_max = lambda_max(ctx)?;
    let c0 = 0.5 * (1.0 / lambda_max - 1.0).sqrt();
    let c = match c {
        Some(c) if !(c > 0.0) || !c.is_finite() => {
            return Err(Error::InvalidConfig(format!("drift constant c must be positive, got {c}")))
        }
        Some(c) => c,
        None => c0,
    };
    let big_lambda = mills_bound();
    let c2 = c * c;
    let prior_term = ctx.v().dot(ctx.pinv_v());
    let a1 = ctx.p() as f64 + (1.0 + 1.0 / c2) * prior_term;
    let a2 = ctx.n() as f64 * lambda_max * (1.0 + big_lambda);
    Ok(DriftReport {
        lambda_max,
        big_lambda,
        c0,
        rho: (1.0 + c2) * lambda_max,
        a1,
        a2,
        l: a1 + (1.0 + c2) * a2,
        c_used: c,
    })
}

/// `ν(β) = βᵀ(XᵀX + Q)β`.
pub fn drift_function(ctx: &PosteriorContext, beta: &DVector<f64>) -> f64 {
    beta.dot(&(ctx.precision() * beta))
}

/// `E[ν(β_{m+1}) | β_m = β']` for one AC-DA transition, in closed form.
///
/// Given `z`, `E[ν(β) | z] = p + (Xᵀz + v)ᵀP⁻¹(Xᵀz + v)`; averaging over the
/// independent truncated normals `zᵢ | β'` with means `μᵢ` and variances `sᵢ²`
/// gives `p + (Xᵀμ + v)ᵀP⁻¹(Xᵀμ + v) + Σ sᵢ² (XP⁻¹Xᵀ)ᵢᵢ`.
pub fn exact_expected_drift(ctx: &PosteriorContext, beta: &DVector<f64>) -> f64 {
    let x = ctx.data().x();
    let xi = x * beta;
    let mut mu = DVector::zeros(ctx.n());
    let mut trace_term = 0.0;
    for (i, &yi) in ctx.data().y().iter().enumerate() {
        let (m, s2) = normal::truncated_moments(xi[i], yi);
        mu[i] = m;
        trace_term += s2 * ctx.leverage()[i];
    }
    let t = x.tr_mul(&mu) + ctx.v();
    ctx.p() as f64 + t.dot(&ctx.solve_precision(&t)) + trace_term
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    TraceClass,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceClassVerdict {
    /// All (non-zero) eigenvalues of `Q^{-1/2}XᵀXQ^{-1/2}` below 7/2.
    pub condition_a: bool,
    pub condition_a_eigenvalues: Vec<f64>,
    /// `XQ^{-1/2}` is rectangular diagonal.
    pub condition_b: bool,
    /// Full column rank when `n ≥ p`, full row rank when `n < p`.
    pub rank_condition: bool,
    pub verdict: Verdict,
}

/// Tests the sufficient trace-class conditions for the AC-DA operator.
pub fn trace_class_check(data: &ProbitData, prior: &PriorSpec) -> Result<TraceClassVerdict> {
    let rank = linalg::rank(data.x());
    let rank_condition = rank == data.n().min(data.p());
    let q = match prior {
        PriorSpec::ImproperFlat => return Err(Error::ImproperPriorUnsupported),
        PriorSpec::GPrior { .. } if !rank_condition || data.n() < data.p() => {
            // The g-prior precision is singular here; nothing to test.
            return Ok(TraceClassVerdict {
                condition_a: false,
                condition_a_eigenvalues: Vec::new(),
                condition_b: false,
                rank_condition: false,
                verdict: Verdict::Unknown,
            });
        }
        _ => prior.resolve(data)?.0,
    };
    let root = linalg::sym_inv_sqrt(&q).ok_or(Error::CholeskyFailure("prior precision Q"))?;
    let xt = data.x() * root;

    let s = linalg::singular_values(&xt);
    let top = s.first().copied().unwrap_or(0.0);
    let eigenvalues: Vec<f64> = s
        .iter()
        .filter(|&&d| d > RANK_TOL * top)
        .map(|d| d * d)
        .collect();
    let threshold = TRACE_CLASS_EIGEN_BOUND * (1.0 - TRACE_CLASS_BOUNDARY_RTOL);
    let condition_a = eigenvalues.iter().all(|&e| e < threshold);

    let condition_b = xt
        .iter()
        .enumerate()
        .all(|(k, &v)| {
            let (i, j) = (k % xt.nrows(), k / xt.nrows());
            i == j || v.abs() < RECTANGULAR_DIAGONAL_TOL
        });

    let verdict = if rank_condition && (condition_a || condition_b) {
        Verdict::TraceClass
    } else {
        Verdict::Unknown
    };
    Ok(TraceClassVerdict {
        condition_a,
        condition_a_eigenvalues: eigenvalues,
        condition_b,
        rank_condition,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProprietyVerdict {
    pub rank_ok: bool,
    /// A witness `a ≥ 1` with `Wᵀa = 0`, when one exists.
    pub positive_null_vector: Option<Vec<f64>>,
    pub proper: bool,
}

/// Maximum `‖Wᵀa‖∞` accepted for a returned witness.
pub const WITNESS_TOL: f64 = 1e-8;

/// Flat-prior propriety: full column rank plus a strictly positive `a` with
/// `Wᵀa = 0`, searched for as `a = 1 + s`, `s ≥ 0`, `Wᵀs = −Wᵀ1`.
pub fn chen_shao_check(data: &ProbitData) -> ProprietyVerdict {
    let rank_ok = data.n() >= data.p() && linalg::rank(data.x()) == data.p();
    let w = sign_transform(data.x(), data.y()).expect("ProbitData shapes are consistent");
    let wt = w.transpose();
    let ones = DVector::from_element(data.n(), 1.0);
    let rhs = -(&wt * &ones);
    let witness = match lp::phase_one(&wt, &rhs) {
        Feasibility::Feasible(s) => {
            let a = s.add_scalar(1.0);
            let residual = (&wt * &a).amax();
            (residual <= WITNESS_TOL).then(|| a.iter().copied().collect::<Vec<_>>())
        }
        Feasibility::Infeasible { .. } => None,
    };
    ProprietyVerdict {
        rank_ok,
        proper: rank_ok && witness.is_some(),
        positive_null_vector: witness,
    }
}

/// A value that exists only for some prior regimes; serializes as the value
/// itself or as the string `"not_applicable"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Applicable<T> {
    Value(T),
    Marker(NotApplicable),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotApplicable {
    NotApplicable,
}

impl<T> Applicable<T> {
    pub fn none() -> Self {
        Applicable::Marker(NotApplicable::NotApplicable)
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Applicable::Value(v) => Some(v),
            Applicable::Marker(_) => None,
        }
    }
}

/// Everything the `check` subcommand emits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub lambda_max: Applicable<f64>,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub c0: Applicable<f64>,
    pub rho: Applicable<f64>,
    #[serde(rename = "L")]
    pub l: Applicable<f64>,
    #[serde(rename = "A1")]
    pub a1: Applicable<f64>,
    #[serde(rename = "A2")]
    pub a2: Applicable<f64>,
    pub trace_class: Applicable<TraceClassVerdict>,
    pub chen_shao: ProprietyVerdict,
}

pub fn theory_report(data: &ProbitData, prior: &PriorSpec) -> Result<TheoryReport> {
    let chen_shao = chen_shao_check(data);
    if prior.regime() == PriorRegime::ImproperFlat {
        return Ok(TheoryReport {
            lambda_max: Applicable::none(),
            big_lambda: mills_bound(),
            c0: Applicable::none(),
            rho: Applicable::none(),
            l: Applicable::none(),
            a1: Applicable::none(),
            a2: Applicable::none(),
            trace_class: Applicable::none(),
            chen_shao,
        });
    }
    let ctx = PosteriorContext::new(data, prior)?;
    let d = drift_constants(&ctx, None)?;
    Ok(TheoryReport {
        lambda_max: Applicable::Value(d.lambda_max),
        big_lambda: d.big_lambda,
        c0: Applicable::Value(d.c0),
        rho: Applicable::Value(d.rho),
        l: Applicable::Value(d.l),
        a1: Applicable::Value(d.a1),
        a2: Applicable::Value(d.a2),
        trace_class: Applicable::Value(trace_class_check(data, prior)?),
        chen_shao,
    })
}
