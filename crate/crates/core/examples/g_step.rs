//! The scalar step of the sandwich sampler: drawing `g > 0` from the
//! density proportional to `g^(n-1) exp(-(A g^2 - 2 B g) / 2)`.
//!
//! With `B = 0` the draw is exact (`g^2` is Gamma). Otherwise it is
//! rejection sampling from a Gamma envelope whose tightness depends on
//! `epsilon`; the table shows how the acceptance rate collapses with `n`
//! at a fixed `epsilon` and how the optimal `epsilon` avoids that.
//!
//! ```bash
//! cargo run --release --example g_step
//! ```

use std::error::Error;

use probit_da::samplers::{optimal_epsilon, sample_g, sample_g_counted, GStepStats};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    // B = 0: E[g^2] = n / A.
    let (a, n) = (4.0, 10);
    let m = 100_000;
    let mean_sq = (0..m).map(|_| sample_g(a, 0.0, n, 0.5, &mut rng).map(|g| g * g)).sum::<Result<f64, _>>()? / m as f64;
    println!("B = 0: mean of g^2 = {mean_sq:.4} (exact {:.4})\n", n as f64 / a);

    println!("{:>5} {:>8} {:>8} {:>14} {:>14}", "n", "A", "B", "accept eps=.5", "accept optimal");
    for n in [2, 5, 10, 20, 40] {
        // A and B scale with n the way they do inside a chain.
        let (a, b) = (n as f64, 0.3 * n as f64);
        let mut fixed = GStepStats::default();
        let mut tuned = GStepStats::default();
        let eps = optimal_epsilon(a, b, n);
        for _ in 0..2_000 {
            sample_g_counted(a, b, n, 0.5, &mut rng, &mut fixed)?;
            sample_g_counted(a, b, n, eps, &mut rng, &mut tuned)?;
        }
        println!(
            "{n:>5} {a:>8.1} {b:>8.1} {:>14.4} {:>14.4}   (optimal eps = {eps:.3})",
            fixed.acceptance_rate(),
            tuned.acceptance_rate()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
