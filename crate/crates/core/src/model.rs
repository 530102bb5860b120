//! Problem data, prior regimes, and the immutable posterior context shared by
//! the samplers and the theory engine.
//!
//! With latent `z`, the full conditional of the coefficients is
//!
//! ```text
//! β | z, y ~ N_p(P⁻¹(v + Xᵀz), P⁻¹),    P = XᵀX + Q
//! ```
//!
//! and everything in [`PosteriorContext`] is a fixed function of `(X, y, Q, v)`
//! precomputed once per problem.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Design matrix and binary response.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbitData {
    x: DMatrix<f64>,
    y: Vec<bool>,
}

impl ProbitData {
    /// `y` entries must be exactly 0 or 1.
    pub fn new(x: DMatrix<f64>, y: &[f64]) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "design matrix must be non-empty, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        let y = y
            .iter()
            .enumerate()
            .map(|(index, &value)| match value {
                0.0 => Ok(false),
                1.0 => Ok(true),
                value => Err(Error::InvalidResponseValue { index, value }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProbitData { x, y })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(rows: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged design rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(rows.len(), p, &flat), y)
    }

    /// A problem with no observations (`n = 0`), for which the posterior is
    /// the prior. Only the quadrature oracle and context construction accept it.
    pub fn prior_only(p: usize) -> Self {
        ProbitData {
            x: DMatrix::zeros(0, p),
            y: Vec::new(),
        }
    }

    /// Returns a copy with an all-ones column prepended.
    pub fn with_intercept(&self) -> Self {
        let n = self.n();
        let x = self.x.clone().insert_column(0, 1.0);
        debug_assert_eq!(x.nrows(), n);
        ProbitData { x, y: self.y.clone() }
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Same problem with rows reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let x = DMatrix::from_fn(self.n(), self.p(), |i, j| self.x[(perm[i], j)]);
        let y = perm.iter().map(|&i| self.y[i]).collect();
        ProbitData { x, y }
    }
}

/// The three prior regimes.
#[derive(Clone, Debug, PartialEq)]
pub enum PriorSpec {
    /// `β ~ N_p(Q⁻¹v, Q⁻¹)`.
    ProperNormal { q: DMatrix<f64>, v: DVector<f64> },
    /// Zellner's g-prior: `Q = XᵀX / g`, `v = 0`.
    GPrior { g: f64 },
    /// Flat prior on `ℝᵖ`; the `Q → 0, v = 0` limit.
    ImproperFlat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorRegime {
    ProperNormal,
    GPrior,
    ImproperFlat,
}

impl PriorSpec {
    pub fn regime(&self) -> PriorRegime {
        match self {
            PriorSpec::ProperNormal { .. } => PriorRegime::ProperNormal,
            PriorSpec::GPrior { .. } => PriorRegime::GPrior,
            PriorSpec::ImproperFlat => PriorRegime::ImproperFlat,
        }
    }

    /// Resolves the regime to a concrete `(Q, v)` for `data`, checking every
    /// regime invariant.
    pub fn resolve(&self, data: &ProbitData) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let p = data.p();
        match self {
            PriorSpec::ProperNormal { q, v } => {
                if q.nrows() != p || q.ncols() != p || v.len() != p {
                    return Err(Error::DimensionMismatch(format!(
                        "prior Q is {}x{} and v has length {}, expected p = {p}",
                        q.nrows(),
                        q.ncols(),
                        v.len()
                    )));
                }
                if q.iter().chain(v.iter()).any(|a| !a.is_finite()) {
                    return Err(Error::NonFinite("prior parameters"));
                }
                if !linalg::is_symmetric(q) {
                    return Err(Error::NotSymmetric("prior precision Q"));
                }
                let q = linalg::symmetrize(q);
                if Cholesky::new(q.clone()).is_none() {
                    return Err(Error::CholeskyFailure("prior precision Q"));
                }
                Ok((q, v.clone()))
            }
            PriorSpec::GPrior { g } => {
                if !(*g > 0.0) || !g.is_finite() {
                    return Err(Error::InvalidPrior(format!("g must be positive, got {g}")));
                }
                require_full_column_rank(data)?;
                let xtx = data.x().tr_mul(data.x());
                Ok((linalg::symmetrize(&(xtx / *g)), DVector::zeros(p)))
            }
            PriorSpec::ImproperFlat => {
                require_full_column_rank(data)?;
                Ok((DMatrix::zeros(p, p), DVector::zeros(p)))
            }
        }
    }
}

fn require_full_column_rank(data: &ProbitData) -> Result<()> {
    let r = linalg::rank(data.x());
    if data.n() < data.p() || r < data.p() {
        return Err(Error::RankDeficient { rank: r, p: data.p() });
    }
    Ok(())
}

/// Row `i` is `xᵢᵀ` when `yᵢ = 0` and `-xᵢᵀ` when `yᵢ = 1`.
pub fn sign_transform(x: &DMatrix<f64>, y: &[bool]) -> Result<DMatrix<f64>> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} rows but y has {} entries",
            x.nrows(),
            y.len()
        )));
    }
    let mut w = x.clone();
    for (i, &yi) in y.iter().enumerate() {
        if yi {
            w.row_mut(i).neg_mut();
        }
    }
    Ok(w)
}

/// Everything both samplers and the theory engine need, computed once.
///
/// Immutable after construction; share it by reference across chains.
#[derive(Clone, Debug)]
pub struct PosteriorContext {
    data: ProbitData,
    prior: PriorSpec,
    q: DMatrix<f64>,
    v: DVector<f64>,
    precision: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    pinv_xt: DMatrix<f64>,
    pinv_v: DVector<f64>,
    bvec: DVector<f64>,
    leverage: DVector<f64>,
    w: DMatrix<f64>,
    q_inv_sqrt: Option<DMatrix<f64>>,
    wtilde: Option<DMatrix<f64>>,
}

impl PosteriorContext {
    pub fn new(data: &ProbitData, prior: &PriorSpec) -> Result<Self> {
        let (q, v) = prior.resolve(data)?;
        let x = data.x();
        let precision = linalg::symmetrize(&(x.tr_mul(x) + &q));
        let chol = Cholesky::new(precision.clone())
            .ok_or(Error::CholeskyFailure("posterior precision XᵀX + Q"))?;
        let pinv_xt = chol.solve(&x.transpose());
        let pinv_v = chol.solve(&v);
        let bvec = x * &pinv_v;
        let leverage = DVector::from_fn(data.n(), |i, _| x.row(i).dot(&pinv_xt.column(i).transpose()));
        let w = sign_transform(x, data.y())?;
        let q_inv_sqrt = match prior.regime() {
            PriorRegime::ImproperFlat => None,
            _ => Some(linalg::sym_inv_sqrt(&q).ok_or(Error::CholeskyFailure("prior precision Q"))?),
        };
        let wtilde = q_inv_sqrt.as_ref().map(|r| &w * r);
        Ok(PosteriorContext {
            data: data.clone(),
            prior: prior.clone(),
            q,
            v,
            precision,
            chol,
            pinv_xt,
            pinv_v,
            bvec,
            leverage,
            w,
            q_inv_sqrt,
            wtilde,
        })
    }

    pub fn data(&self) -> &ProbitData {
        &self.data
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn regime(&self) -> PriorRegime {
        self.prior.regime()
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn p(&self) -> usize {
        self.data.p()
    }

    /// Resolved prior precision `Q` (zero for the flat prior).
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Resolved prior linear term `v`.
    pub fn v(&self) -> &DVector<f64> {
        &self.v
    }

    /// `P = XᵀX + Q`.
    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// Lower Cholesky factor `L` with `L Lᵀ = P`.
    pub fn chol_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub(crate) fn cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }

    /// `P⁻¹Xᵀ`, `p × n`.
    pub fn pinv_xt(&self) -> &DMatrix<f64> {
        &self.pinv_xt
    }

    /// `P⁻¹v`.
    pub fn pinv_v(&self) -> &DVector<f64> {
        &self.pinv_v
    }

    /// `X P⁻¹ v`, the linear form of `B(z)`.
    pub fn bvec(&self) -> &DVector<f64> {
        &self.bvec
    }

    /// Diagonal of `X P⁻¹ Xᵀ`.
    pub fn leverage(&self) -> &DVector<f64> {
        &self.leverage
    }

    /// `Iₙ - X P⁻¹ Xᵀ`, the quadratic form of `A(z)`.
    ///
    /// Assembled on demand: the samplers evaluate `A(z)` in `O(np)` without
    /// it, and it is `n × n`.
    pub fn a_quad(&self) -> DMatrix<f64> {
        let n = self.n();
        linalg::symmetrize(&(DMatrix::identity(n, n) - self.data.x() * &self.pinv_xt))
    }

    /// Sign-flipped design matrix `W`.
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Symmetric `Q^{-1/2}`; `None` for the flat prior.
    pub fn q_inv_sqrt(&self) -> Option<&DMatrix<f64>> {
        self.q_inv_sqrt.as_ref()
    }

    /// Whitened `W Q^{-1/2}`; `None` for the flat prior.
    pub fn wtilde(&self) -> Option<&DMatrix<f64>> {
        self.wtilde.as_ref()
    }

    /// `P⁻¹ b`.
    pub fn solve_precision(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}
