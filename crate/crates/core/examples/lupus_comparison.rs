//! Four-chain comparison on the lupus nephritis data: AC-DA and Haar PX-DA,
//! each under a g-prior with g = 3.499999 and under the flat prior, started
//! at the maximum-likelihood estimate.
//!
//! Set `LUPUS_CSV` to a file with header `y,x1,x2` to use the real data;
//! otherwise the fixed synthetic stand-in is used.
//!
//! ```bash
//! cargo run --release --example lupus_comparison
//! ```

use std::error::Error;
use std::path::PathBuf;

use nalgebra::DVector;
use probit_da::cli;
use probit_da::datasets::{synthetic_lupus, LUPUS_MLE};
use probit_da::diagnostics::compare_chains;
use probit_da::samplers::run_chain;
use probit_da::{Algorithm, PosteriorContext, PriorSpec, SamplerConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = match std::env::var_os("LUPUS_CSV") {
        Some(path) => cli::load_csv(&PathBuf::from(path), true)?,
        None => synthetic_lupus().with_intercept(),
    };
    let init = DVector::from_column_slice(&LUPUS_MLE);
    let burnin = 10_000;
    let kept = 100_000;

    let mut runs = Vec::new();
    for (prior_label, prior) in [("proper", PriorSpec::GPrior { g: 3.499999 }), ("improper", PriorSpec::ImproperFlat)] {
        let ctx = PosteriorContext::new(&data, &prior)?;
        for algorithm in [Algorithm::Acda, Algorithm::HaarPxda] {
            let cfg = SamplerConfig::new(algorithm, burnin + kept, 2019).with_burnin(burnin);
            let sample = run_chain(&ctx, &cfg, &init)?;
            println!(
                "{prior_label:>8} {algorithm:<9} {:.2}s",
                sample.meta.wall_clock_secs
            );
            runs.push((format!("{prior_label}-{algorithm}"), sample));
        }
    }

    let report = compare_chains(&runs, 50)?;
    for coord in [1, 2] {
        println!("\nbeta_{coord}: autocorrelation at lags 1, 5, 17, 50 | mean | sigma2_hat");
        for run in &report.runs {
            let r = &run.report;
            let acf = &r.acf[coord];
            println!(
                "  {:<18} {:.3} {:.3} {:.3} {:.3} | {:>8.4} | {:.3}",
                run.label, acf[1], acf[5], acf[17], acf[50], r.mean[coord], r.sigma2_hat[coord]
            );
        }
        println!("  lag-1 order: {:?}", report.coordinates[coord].lag1_order);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
