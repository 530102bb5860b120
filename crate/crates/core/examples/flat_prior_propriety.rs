//! Under the flat prior the posterior is proper only if the design has full
//! column rank and there is a strictly positive vector `a` with `W^T a = 0`,
//! where `W` is the design with rows sign-flipped for `y = 0`. The check
//! solves that feasibility problem and returns the witness.
//!
//! ```bash
//! cargo run --example flat_prior_propriety
//! ```

use std::error::Error;

use nalgebra::dmatrix;
use probit_da::datasets::synthetic_lupus;
use probit_da::theory::chen_shao_check;
use probit_da::ProbitData;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cases = [
        ("one success, one failure", ProbitData::new(dmatrix![1.0; 1.0], &[0.0, 1.0])?),
        ("two successes", ProbitData::new(dmatrix![1.0; 1.0], &[1.0, 1.0])?),
        (
            "separated by x",
            ProbitData::new(dmatrix![1.0, -2.0; 1.0, -1.0; 1.0, 1.0; 1.0, 2.0], &[0.0, 0.0, 1.0, 1.0])?,
        ),
        ("lupus-shaped", synthetic_lupus().with_intercept()),
    ];
    for (label, data) in cases {
        let verdict = chen_shao_check(&data);
        let witness = verdict.positive_null_vector.as_ref().map(|a| {
            let shown: Vec<String> = a.iter().take(4).map(|v| format!("{v:.3}")).collect();
            format!("[{}{}]", shown.join(", "), if a.len() > 4 { ", ..." } else { "" })
        });
        println!(
            "{label:<26} rank ok: {:<5} proper: {:<5} witness: {}",
            verdict.rank_ok,
            verdict.proper,
            witness.unwrap_or_else(|| "none".into())
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
