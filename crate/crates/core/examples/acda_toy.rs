//! The smallest possible probit problem, y = 1 at x = 1 under a N(0, 1)
//! prior, sampled with the Albert–Chib Gibbs sampler and checked against
//! numerical integration of the exact posterior.
//!
//! ```bash
//! cargo run --release --example acda_toy
//! ```

use std::error::Error;

use nalgebra::{dmatrix, dvector};
use probit_da::diagnostics::{batch_means, quadrature_posterior_moments};
use probit_da::samplers::run_chain;
use probit_da::{Algorithm, PosteriorContext, PriorSpec, ProbitData, SamplerConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = ProbitData::new(dmatrix![1.0], &[1.0])?;
    let prior = PriorSpec::ProperNormal {
        q: dmatrix![1.0],
        v: dvector![0.0],
    };
    let ctx = PosteriorContext::new(&data, &prior)?;

    let cfg = SamplerConfig::new(Algorithm::Acda, 101_000, 1).with_burnin(1_000);
    let sample = run_chain(&ctx, &cfg, &dvector![0.0])?;
    let beta = sample.column(0);
    let mean = beta.iter().sum::<f64>() / beta.len() as f64;
    let bm = batch_means(beta)?;

    let exact = quadrature_posterior_moments(&data, &prior)?;
    println!("draws            {}", sample.rows());
    println!("chain mean       {mean:.4} ± {:.4} (batch-means SE)", bm.standard_error(beta.len()));
    println!("quadrature mean  {:.4}", exact.mean[0]);
    println!("posterior sd     {:.4}", exact.variance(0).sqrt());
    println!("ESS              {:.0} of {}", bm.ess.min(beta.len() as f64), beta.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
