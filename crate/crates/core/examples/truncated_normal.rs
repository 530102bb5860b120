//! Drawing the latent variables: a unit-variance normal truncated to one
//! side of zero, including far into the tail where naive rejection would
//! almost never accept.
//!
//! ```bash
//! cargo run --release --example truncated_normal
//! ```

use std::error::Error;

use probit_da::normal::truncated_moments;
use probit_da::samplers::sample_tn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = 200_000;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "mu", "mean", "exact", "var", "exact");
    for mu in [2.0, 0.0, -3.0, -8.0, -25.0] {
        let draws: Vec<f64> = (0..m).map(|_| sample_tn(mu, true, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / m as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let (exact_mean, exact_var) = truncated_moments(mu, true);
        println!("{mu:>6} {mean:>10.5} {exact_mean:>10.5} {var:>10.5} {exact_var:>10.5}");
    }
    // The negative side is the mirror image.
    let x = sample_tn(25.0, false, &mut rng);
    println!("\nTN(25, 1) restricted to x <= 0: {x:.5}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
