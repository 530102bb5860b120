//! Per-chain output analysis: autocorrelations, running means, batch-means
//! variance and effective sample size, and the exact posterior moments by
//! quadrature for a two-coefficient problem.
//!
//! ```bash
//! cargo run --release --example convergence_diagnostics
//! ```

use std::error::Error;

use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use probit_da::datasets::simulate_probit;
use probit_da::diagnostics::{diagnose, quadrature_posterior_moments};
use probit_da::samplers::run_chain;
use probit_da::{Algorithm, PosteriorContext, PriorSpec, SamplerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = DMatrix::from_fn(30, 2, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let data = simulate_probit(x, &dvector![-0.5, 1.0], &mut rng);
    let prior = PriorSpec::ProperNormal {
        q: dmatrix![0.25, 0.0; 0.0, 0.25],
        v: dvector![0.0, 0.0],
    };
    let ctx = PosteriorContext::new(&data, &prior)?;
    let cfg = SamplerConfig::new(Algorithm::Acda, 60_000, 9).with_burnin(1_000);
    let sample = run_chain(&ctx, &cfg, &DVector::zeros(2))?;
    let report = diagnose(&sample, 20)?;
    let exact = quadrature_posterior_moments(&data, &prior)?;

    for j in 0..2 {
        let se = (report.sigma2_hat[j] / report.draws as f64).sqrt();
        println!("beta_{}:", j + 1);
        println!("  mean {:.4} ± {:.4}   quadrature {:.4}", report.mean[j], se, exact.mean[j]);
        println!("  sd   {:.4}            quadrature {:.4}", report.sd[j], exact.variance(j).sqrt());
        println!("  ESS  {:.0} of {}", report.ess[j], report.draws);
        let acf: Vec<String> = [1, 2, 5, 10, 20].iter().map(|&k| format!("{:.3}", report.acf[j][k])).collect();
        println!("  acf at lags 1, 2, 5, 10, 20: {}", acf.join(" "));
        let rm = &report.running_means[j];
        let picks = [0, rm.len() / 10, rm.len() / 2, rm.len() - 1];
        let shown: Vec<String> = picks
            .iter()
            .map(|&i| format!("{}:{:.3}", report.checkpoints[i], rm[i]))
            .collect();
        println!("  running mean {}", shown.join("  "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
