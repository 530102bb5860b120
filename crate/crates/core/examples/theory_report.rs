//! Convergence guarantees that can be computed from the data alone: the
//! constants of the geometric drift condition for AC-DA and the sufficient
//! conditions for its Markov operator to be trace class.
//!
//! Shown for the lupus-shaped data under a g-prior just inside and exactly
//! on the trace-class eigenvalue bound of 7/2.
//!
//! ```bash
//! cargo run --example theory_report
//! ```

use std::error::Error;

use probit_da::cli::theory_json;
use probit_da::datasets::synthetic_lupus;
use probit_da::theory::{drift_constants, theory_report, trace_class_check};
use probit_da::{PosteriorContext, PriorSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = synthetic_lupus().with_intercept();

    for g in [3.499999, 3.5] {
        let prior = PriorSpec::GPrior { g };
        let ctx = PosteriorContext::new(&data, &prior)?;
        let drift = drift_constants(&ctx, None)?;
        let tc = trace_class_check(&data, &prior)?;
        println!(
            "g = {g}: lambda_max = {:.4}, rho = {:.4}, L = {:.1}, trace class: {:?}",
            drift.lambda_max, drift.rho, drift.l, tc.verdict
        );
    }

    // The full report, as `probit-da check` prints it.
    let report = theory_report(&data, &PriorSpec::GPrior { g: 3.499999 })?;
    println!("\n{}", theory_json(&report));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
