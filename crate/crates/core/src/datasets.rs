//! Synthetic probit data sets.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::ProbitData;
use crate::normal;
use crate::theory::chen_shao_check;

/// Published maximum-likelihood estimate (intercept, x1, x2) for the lupus
/// nephritis data, used as the default start of the comparison chains.
pub const LUPUS_MLE: [f64; 3] = [-1.778, 4.374, 2.428];

/// Rows of the lupus nephritis data.
pub const LUPUS_N: usize = 55;

/// Seed of the synthetic stand-in for the lupus data.
pub const SYNTHETIC_LUPUS_SEED: u64 = 20_190_415;

/// Draws `y` from the probit model `P(y = 1) = Φ(xᵀβ)`.
pub fn simulate_probit<R: Rng + ?Sized>(x: DMatrix<f64>, beta: &DVector<f64>, rng: &mut R) -> ProbitData {
    let eta = &x * beta;
    let y: Vec<f64> = eta
        .iter()
        .map(|&e| if rng.random::<f64>() < normal::cdf(e) { 1.0 } else { 0.0 })
        .collect();
    ProbitData::new(x, &y).expect("simulated data are well formed")
}

/// A 55-row, two-covariate stand-in for the lupus data (no intercept
/// column), simulated from the probit model at [`LUPUS_MLE`].
///
/// Covariates are standard normal scaled by 0.6 and shifted by 0.2. Draws are
/// repeated with the same stream until the flat-prior posterior is proper,
/// so the result is fixed and always usable under every prior regime.
pub fn synthetic_lupus() -> ProbitData {
    let mut rng = ChaCha8Rng::seed_from_u64(SYNTHETIC_LUPUS_SEED);
    let beta = DVector::from_column_slice(&LUPUS_MLE);
    loop {
        let x = DMatrix::from_fn(LUPUS_N, 3, |_, j| {
            if j == 0 {
                1.0
            } else {
                0.2 + 0.6 * rng.sample::<f64, _>(StandardNormal)
            }
        });
        let data = simulate_probit(x, &beta, &mut rng);
        if chen_shao_check(&data).proper {
            return ProbitData::new(data.x().columns(1, 2).into_owned(), &response(&data))
                .expect("subset of valid data");
        }
    }
}

fn response(data: &ProbitData) -> Vec<f64> {
    data.y().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_lupus_is_fixed_and_proper() {
        let a = synthetic_lupus();
        let b = synthetic_lupus();
        assert_eq!(a, b);
        assert_eq!((a.n(), a.p()), (55, 2));
        assert!(chen_shao_check(&a.with_intercept()).proper);
    }
}
