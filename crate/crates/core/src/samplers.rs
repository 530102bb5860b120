//! The AC-DA Gibbs sampler and its Haar PX-DA sandwich variant.
//!
//! One AC-DA transition `β_m → β_{m+1}`:
//!
//! 1. `zᵢ ~ TN(xᵢᵀβ_m, 1, yᵢ)` independently,
//! 2. `β_{m+1} ~ N_p(P⁻¹(v + Xᵀz), P⁻¹)`.
//!
//! Haar PX-DA inserts a move between the two: draw `g > 0` from the density
//! proportional to `g^{n−1} exp(−½(A(z)g² − 2B(z)g))` and replace `z` by `gz`.

use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{PosteriorContext, PriorRegime};

/// The random number generator every chain uses.
pub type ChainRng = ChaCha8Rng;

/// `Φ⁻¹(0.3)`: at or above this mean, plain rejection from `N(mu, 1)` keeps
/// at least 30% of proposals for the positive side.
const NAIVE_MEAN_CUTOFF: f64 = -0.524_400_512_708_040_9;

/// Consecutive g-step rejections tolerated before giving up.
pub const G_STEP_MAX_REJECTIONS: u64 = 1_000_000;

pub const DEFAULT_EPSILON: f64 = 0.5;

/// Draws from `N(mu, 1)` restricted to `(0, ∞)`.
fn sample_positive_tn<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> f64 {
    if mu >= NAIVE_MEAN_CUTOFF {
        loop {
            let e: f64 = rng.sample(StandardNormal);
            let x = mu + e;
            if x > 0.0 {
                return x;
            }
        }
    }
    // Translated-exponential proposal on the standardized tail `(a, ∞)`
    // with the optimal rate.
    let a = -mu;
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = rng.sample(Exp1);
        let z = a + e / alpha;
        let u: f64 = rng.random();
        let d = z - alpha;
        if u.ln() <= -0.5 * d * d && z > a {
            return mu + z;
        }
    }
}

/// One draw from `TN(mu, 1, positive)`: the unit-variance normal centred at
/// `mu` restricted to `(0, ∞)` if `positive`, to `(−∞, 0]` otherwise.
pub fn sample_tn<R: Rng + ?Sized>(mu: f64, positive: bool, rng: &mut R) -> f64 {
    if positive {
        sample_positive_tn(mu, rng)
    } else {
        -sample_positive_tn(-mu, rng)
    }
}

fn draw_z_into<R: Rng + ?Sized>(beta: &DVector<f64>, ctx: &PosteriorContext, rng: &mut R, z: &mut DVector<f64>) {
    let x = ctx.data().x();
    z.gemv(1.0, x, beta, 0.0);
    for (zi, &yi) in z.iter_mut().zip(ctx.data().y()) {
        *zi = sample_tn(*zi, yi, rng);
    }
}

/// Adds `N_p(0, P⁻¹)` noise to `mean` in place.
fn add_posterior_noise<R: Rng + ?Sized>(ctx: &PosteriorContext, rng: &mut R, mean: &mut DVector<f64>) {
    let mut eps = DVector::from_fn(ctx.p(), |_, _| rng.sample::<f64, _>(StandardNormal));
    // Solve Lᵀ x = ε so that x ~ N(0, (L Lᵀ)⁻¹).
    let solved = ctx.cholesky().l_dirty().tr_solve_lower_triangular_mut(&mut eps);
    debug_assert!(solved);
    *mean += eps;
}

/// `zᵢ ~ TN(xᵢᵀβ, 1, yᵢ)` independently.
pub fn sample_z_given_beta<R: Rng + ?Sized>(beta: &DVector<f64>, ctx: &PosteriorContext, rng: &mut R) -> DVector<f64> {
    let mut z = DVector::zeros(ctx.n());
    draw_z_into(beta, ctx, rng, &mut z);
    z
}

/// `β ~ N_p(P⁻¹(v + Xᵀz), P⁻¹)`.
pub fn sample_beta_given_z<R: Rng + ?Sized>(z: &DVector<f64>, ctx: &PosteriorContext, rng: &mut R) -> DVector<f64> {
    let mut beta = ctx.pinv_xt() * z + ctx.pinv_v();
    add_posterior_noise(ctx, rng, &mut beta);
    beta
}

/// `A(z) = zᵀ(I − XP⁻¹Xᵀ)z` and `B(z) = zᵀXP⁻¹v`.
pub fn compute_ab(z: &DVector<f64>, ctx: &PosteriorContext) -> Result<(f64, f64)> {
    let m = ctx.pinv_xt() * z;
    ab_from_projection(z, &m, ctx)
}

/// With `m = P⁻¹Xᵀz`, `A(z) = ‖z − Xm‖² + mᵀQm`, a sum of nonnegative terms,
/// and `B(z) = mᵀv`.
fn ab_from_projection(z: &DVector<f64>, m: &DVector<f64>, ctx: &PosteriorContext) -> Result<(f64, f64)> {
    // Column-major slices: tiny problems spend more in iterator adaptors
    // than in arithmetic otherwise.
    let (x, q, m, z) = (ctx.data().x().as_slice(), ctx.q().as_slice(), m.as_slice(), z.as_slice());
    let (n, p) = (z.len(), m.len());
    let mut a = 0.0;
    for i in 0..n {
        let mut r = z[i];
        for j in 0..p {
            r -= x[i + j * n] * m[j];
        }
        a += r * r;
    }
    for j in 0..p {
        let qj = &q[j * p..(j + 1) * p];
        a += m[j] * qj.iter().zip(m).map(|(qk, mk)| qk * mk).sum::<f64>();
    }
    if !(a > 0.0) && z.iter().all(|&zi| zi == 0.0) {
        return Err(Error::ZeroLatent);
    }
    let b = m.iter().zip(ctx.v().as_slice()).map(|(mi, vi)| mi * vi).sum();
    Ok((a, b))
}

/// Running acceptance counts of the g-step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GStepStats {
    pub draws: u64,
    pub proposals: u64,
}

impl GStepStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            f64::NAN
        } else {
            self.draws as f64 / self.proposals as f64
        }
    }
}

/// Log of the three pieces of the g-step envelope at `u = g²`:
/// the target `l(u)`, the constant `M` and the Gamma proposal density `f(u)`.
#[derive(Clone, Copy, Debug)]
pub struct EnvelopeTerms {
    pub ln_target: f64,
    pub ln_m: f64,
    pub ln_proposal: f64,
}

impl EnvelopeTerms {
    pub fn new(u: f64, a: f64, b: f64, n: usize, epsilon: f64) -> Self {
        let shape = n as f64 / 2.0;
        let scale = 2.0 / ((1.0 - epsilon) * a);
        let ln_target = (shape - 1.0) * u.ln() - 0.5 * a * u + b * u.sqrt();
        let ln_m = b * b / (2.0 * epsilon * a) + ln_gamma(shape) + shape * scale.ln();
        let ln_proposal = (shape - 1.0) * u.ln() - u / scale - ln_gamma(shape) - shape * scale.ln();
        EnvelopeTerms {
            ln_target,
            ln_m,
            ln_proposal,
        }
    }

    /// `ln ρ(u) = ln l(u) − ln M − ln f(u)`.
    pub fn ln_acceptance(&self) -> f64 {
        self.ln_target - self.ln_m - self.ln_proposal
    }
}

/// `ln ρ(u)` in closed form: `−(√(εAu/2) − B/√(2εA))²`.
pub fn ln_acceptance_ratio(u: f64, a: f64, b: f64, epsilon: f64) -> f64 {
    let d = (epsilon * a * u / 2.0).sqrt() - b / (2.0 * epsilon * a).sqrt();
    -d * d
}

/// The `ε` that minimizes the envelope constant `M`, and so maximizes the
/// overall acceptance rate `∫l / M`, for given `(A, B, n)`.
///
/// Setting `d ln M / dε = 0` gives `nε² = (B²/A)(1 − ε)`. The positive
/// root is written as `2c / (c + √(c² + 4nc))`, `c = B²/A`, to avoid
/// cancellation. With `ε = ½` the acceptance rate decays exponentially in
/// `n`; at the optimum it stays bounded away from zero. When `B = 0`, where
/// `ε` is unused, the default is returned.
pub fn optimal_epsilon(a: f64, b: f64, n: usize) -> f64 {
    let c = b * b / a;
    let eps = 2.0 * c / (c + (c * c + 4.0 * n as f64 * c).sqrt());
    if eps.is_finite() {
        eps.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    } else {
        DEFAULT_EPSILON
    }
}

fn check_g_inputs(a: f64, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonpositiveA(a));
    }
    Ok(())
}

/// Draws `g` from the density proportional to `g^{n−1} exp(−½(A g² − 2B g))`.
///
/// Works on `u = g²`: exactly `Gamma(n/2, scale 2/A)` when `B = 0`, otherwise
/// rejection from `Gamma(n/2, scale 2/((1−ε)A))`.
pub fn sample_g<R: Rng + ?Sized>(a: f64, b: f64, n: usize, epsilon: f64, rng: &mut R) -> Result<f64> {
    let mut stats = GStepStats::default();
    sample_g_counted(a, b, n, epsilon, rng, &mut stats)
}

pub fn sample_g_counted<R: Rng + ?Sized>(
    a: f64,
    b: f64,
    n: usize,
    epsilon: f64,
    rng: &mut R,
    stats: &mut GStepStats,
) -> Result<f64> {
    check_g_inputs(a, epsilon)?;
    if n == 0 {
        return Err(Error::InvalidConfig("g-step needs n >= 1".into()));
    }
    // `Gamma(n/2, scale s)` is `s/2 · χ²_n`.
    let chi2 = ChiSquare::new(n)?;
    if b == 0.0 {
        stats.draws += 1;
        stats.proposals += 1;
        return Ok((chi2.sample(rng) / a).sqrt());
    }
    let scale = 1.0 / ((1.0 - epsilon) * a);
    for _ in 0..G_STEP_MAX_REJECTIONS {
        let u = scale * chi2.sample(rng);
        stats.proposals += 1;
        let accept: f64 = rng.random();
        if accept.ln() < ln_acceptance_ratio(u, a, b, epsilon) {
            stats.draws += 1;
            return Ok(u.sqrt());
        }
    }
    Err(Error::GStepStalled(G_STEP_MAX_REJECTIONS))
}

/// Degrees of freedom up to which `χ²_n` is drawn as a sum of squared
/// normals; beyond it the Gamma sampler is cheaper.
const CHI_SQUARE_DIRECT_MAX: usize = 16;

/// Exact `χ²_n` sampler.
enum ChiSquare {
    SumOfSquares(usize),
    Gamma(Gamma<f64>),
}

impl ChiSquare {
    fn new(n: usize) -> Result<Self> {
        if n <= CHI_SQUARE_DIRECT_MAX {
            Ok(ChiSquare::SumOfSquares(n))
        } else {
            Gamma::new(n as f64 / 2.0, 2.0)
                .map(ChiSquare::Gamma)
                .map_err(|_| Error::NonFinite("g-step gamma parameters"))
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ChiSquare::SumOfSquares(n) => (0..*n)
                .map(|_| {
                    let e: f64 = rng.sample(StandardNormal);
                    e * e
                })
                .sum(),
            ChiSquare::Gamma(g) => g.sample(rng),
        }
    }
}

/// Current position of a chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub beta: DVector<f64>,
    /// Latents used to produce `beta`: `z` for AC-DA, `gz` for Haar PX-DA.
    pub last_z: Option<DVector<f64>>,
}

impl ChainState {
    pub fn new(beta: DVector<f64>) -> Self {
        ChainState { beta, last_z: None }
    }
}

/// One AC-DA transition.
pub fn acda_step<R: Rng + ?Sized>(state: &ChainState, ctx: &PosteriorContext, rng: &mut R) -> ChainState {
    let z = sample_z_given_beta(&state.beta, ctx, rng);
    let beta = sample_beta_given_z(&z, ctx, rng);
    ChainState { beta, last_z: Some(z) }
}

/// One Haar PX-DA transition.
pub fn haar_pxda_step<R: Rng + ?Sized>(
    state: &ChainState,
    ctx: &PosteriorContext,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<ChainState> {
    let mut stats = GStepStats::default();
    let mut z = sample_z_given_beta(&state.beta, ctx, rng);
    let mut beta = ctx.pinv_xt() * &z;
    sandwich_move(ctx, cfg.epsilon_rule(), rng, &mut stats, &mut z, &mut beta)?;
    Ok(ChainState { beta, last_z: Some(z) })
}

/// Given `z` and `m = P⁻¹Xᵀz`, draws `g`, rescales `z ← gz`, and overwrites
/// `m` with a draw of `β | gz`. `epsilon` of `None` picks
/// [`optimal_epsilon`] afresh for each `(A, B)`.
fn sandwich_move<R: Rng + ?Sized>(
    ctx: &PosteriorContext,
    epsilon: Option<f64>,
    rng: &mut R,
    stats: &mut GStepStats,
    z: &mut DVector<f64>,
    m: &mut DVector<f64>,
) -> Result<()> {
    let (a, b) = ab_from_projection(z, m, ctx)?;
    let n = ctx.n();
    let g = if b == 0.0 && n <= CHI_SQUARE_DIRECT_MAX && a > 0.0 && a.is_finite() {
        // Same law as the general B = 0 branch, without its bookkeeping.
        stats.draws += 1;
        stats.proposals += 1;
        (ChiSquare::SumOfSquares(n).sample(rng) / a).sqrt()
    } else {
        let eps = match epsilon {
            Some(e) => e,
            None if b != 0.0 && a > 0.0 => optimal_epsilon(a, b, n),
            None => DEFAULT_EPSILON,
        };
        sample_g_counted(a, b, n, eps, rng, stats)?
    };
    z.as_mut_slice().iter_mut().for_each(|zi| *zi *= g);
    m.axpy(1.0, ctx.pinv_v(), g);
    add_posterior_noise(ctx, rng, m);
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Acda,
    HaarPxda,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Acda => "acda",
            Algorithm::HaarPxda => "haar_pxda",
        })
    }
}

fn default_thin() -> usize {
    1
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    /// Total iterations, burn-in included.
    pub iterations: usize,
    #[serde(default)]
    pub burnin: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default)]
    pub seed: u64,
    /// Envelope parameter of the g-step rejection sampler.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Ignore `epsilon` and use [`optimal_epsilon`] at every g-step. The
    /// chain has the same law either way; only the cost of the g-step
    /// changes.
    #[serde(default)]
    pub adaptive_epsilon: bool,
}

impl SamplerConfig {
    pub fn new(algorithm: Algorithm, iterations: usize, seed: u64) -> Self {
        SamplerConfig {
            algorithm,
            iterations,
            burnin: 0,
            thin: 1,
            seed,
            epsilon: DEFAULT_EPSILON,
            adaptive_epsilon: false,
        }
    }

    pub fn with_adaptive_epsilon(mut self) -> Self {
        self.adaptive_epsilon = true;
        self
    }

    fn epsilon_rule(&self) -> Option<f64> {
        (!self.adaptive_epsilon).then_some(self.epsilon)
    }

    pub fn with_burnin(mut self, burnin: usize) -> Self {
        self.burnin = burnin;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    /// Number of retained draws, `⌊(iterations − burnin) / thin⌋`.
    pub fn kept(&self) -> usize {
        self.iterations.saturating_sub(self.burnin) / self.thin.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        if self.kept() == 0 {
            return Err(Error::InvalidConfig(format!(
                "no draws retained: iterations {} burnin {} thin {}",
                self.iterations, self.burnin, self.thin
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub algorithm: Algorithm,
    pub prior: PriorRegime,
    pub seed: u64,
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub epsilon: f64,
    pub adaptive_epsilon: bool,
    pub init_beta: Vec<f64>,
    /// Present for Haar PX-DA runs.
    pub g_step: Option<GStepStats>,
    /// Not serialized, so that output files depend only on the inputs.
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

/// Retained draws, one row per kept iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    pub draws: nalgebra::DMatrix<f64>,
    pub meta: SampleMeta,
}

impl SampleMatrix {
    pub fn rows(&self) -> usize {
        self.draws.nrows()
    }

    pub fn p(&self) -> usize {
        self.draws.ncols()
    }

    /// The trace of coordinate `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.draws.nrows();
        &self.draws.as_slice()[j * m..(j + 1) * m]
    }
}

/// A running chain with preallocated scratch space.
pub struct Chain<'a> {
    ctx: &'a PosteriorContext,
    algorithm: Algorithm,
    epsilon: Option<f64>,
    rng: ChainRng,
    beta: DVector<f64>,
    z: DVector<f64>,
    stats: GStepStats,
}

impl<'a> Chain<'a> {
    pub fn new(ctx: &'a PosteriorContext, cfg: &SamplerConfig, init_beta: &DVector<f64>) -> Result<Self> {
        cfg.validate()?;
        if init_beta.len() != ctx.p() {
            return Err(Error::DimensionMismatch(format!(
                "initial beta has length {}, expected p = {}",
                init_beta.len(),
                ctx.p()
            )));
        }
        if init_beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("initial beta"));
        }
        if ctx.n() == 0 {
            return Err(Error::InvalidConfig("cannot sample a problem without observations".into()));
        }
        Ok(Chain {
            ctx,
            algorithm: cfg.algorithm,
            epsilon: cfg.epsilon_rule(),
            rng: ChainRng::seed_from_u64(cfg.seed),
            beta: init_beta.clone(),
            z: DVector::zeros(ctx.n()),
            stats: GStepStats::default(),
        })
    }

    pub fn step(&mut self) -> Result<()> {
        draw_z_into(&self.beta, self.ctx, &mut self.rng, &mut self.z);
        self.beta.gemv(1.0, self.ctx.pinv_xt(), &self.z, 0.0);
        match self.algorithm {
            Algorithm::Acda => {
                self.beta += self.ctx.pinv_v();
                add_posterior_noise(self.ctx, &mut self.rng, &mut self.beta);
            }
            Algorithm::HaarPxda => sandwich_move(
                self.ctx,
                self.epsilon,
                &mut self.rng,
                &mut self.stats,
                &mut self.z,
                &mut self.beta,
            )?,
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("beta draw"));
        }
        Ok(())
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    /// Latents behind the current `beta`.
    pub fn last_z(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn state(&self) -> ChainState {
        ChainState {
            beta: self.beta.clone(),
            last_z: Some(self.z.clone()),
        }
    }

    pub fn g_stats(&self) -> GStepStats {
        self.stats
    }
}

/// Runs one chain: discards `burnin` iterations, then keeps every `thin`-th.
pub fn run_chain(ctx: &PosteriorContext, cfg: &SamplerConfig, init_beta: &DVector<f64>) -> Result<SampleMatrix> {
    let start = Instant::now();
    let mut chain = Chain::new(ctx, cfg, init_beta)?;
    let kept = cfg.kept();
    let p = ctx.p();
    let mut draws = nalgebra::DMatrix::zeros(kept, p);
    for _ in 0..cfg.burnin {
        chain.step()?;
    }
    for row in 0..kept {
        for _ in 0..cfg.thin {
            chain.step()?;
        }
        draws.row_mut(row).tr_copy_from(chain.beta());
    }
    let meta = SampleMeta {
        algorithm: cfg.algorithm,
        prior: ctx.regime(),
        seed: cfg.seed,
        iterations: cfg.iterations,
        burnin: cfg.burnin,
        thin: cfg.thin,
        epsilon: cfg.epsilon,
        adaptive_epsilon: cfg.adaptive_epsilon,
        init_beta: init_beta.iter().copied().collect(),
        g_step: (cfg.algorithm == Algorithm::HaarPxda).then(|| chain.g_stats()),
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    Ok(SampleMatrix { draws, meta })
}

/// Runs `chains` independent chains concurrently, chain `k` seeded with
/// `cfg.seed + k`.
pub fn run_chains(
    ctx: &PosteriorContext,
    cfg: &SamplerConfig,
    init_beta: &DVector<f64>,
    chains: usize,
) -> Result<Vec<SampleMatrix>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains)
            .map(|k| {
                let mut cfg = cfg.clone();
                cfg.seed = cfg.seed.wrapping_add(k as u64);
                scope.spawn(move || run_chain(ctx, &cfg, init_beta))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}
