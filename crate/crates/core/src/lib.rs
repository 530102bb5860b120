//! Bayesian probit regression by data augmentation.
//!
//! - [`model`]: data, the three prior regimes, and the precomputed
//!   [`PosteriorContext`](model::PosteriorContext).
//! - [`samplers`]: the Albert–Chib DA Gibbs sampler (AC-DA) and the Haar
//!   PX-DA sandwich sampler, including the exact g-step.
//! - [`theory`]: drift constants of the geometric-ergodicity bound, the
//!   trace-class sufficient conditions, and flat-prior propriety.
//! - [`diagnostics`]: autocorrelations, running means, batch means, a
//!   quadrature oracle for `p ≤ 2`, and multi-chain comparison.
//! - [`cli`]: file formats and the workflows behind the `probit-da` binary.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

// `!(x > 0.0)` is used on purpose throughout: unlike `x <= 0.0` it also
// rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod datasets;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod normal;
pub mod samplers;
pub mod theory;

pub use error::{Error, ErrorKind, Result};
pub use model::{PosteriorContext, PriorRegime, PriorSpec, ProbitData};
pub use samplers::{Algorithm, ChainState, SampleMatrix, SamplerConfig};
