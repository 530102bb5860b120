mod common;

use common::{big_phi, mean_se, phi, random_design, random_proper_problem, random_response, rng, std_normal};
use nalgebra::{dmatrix, dvector, DMatrix, DVector, SymmetricEigen};
use probit_da::model::sign_transform;
use probit_da::theory::{
    chen_shao_check, drift_constants, drift_function, exact_expected_drift, lambda_max, mills_bound, mills_term,
    shrinkage_eigenvalues, trace_class_check, Verdict, WITNESS_TOL,
};
use probit_da::{Error, PosteriorContext, PriorSpec, ProbitData};
use rand::Rng;

/// Eigenvalues of the explicitly assembled `B(BᵀB + τI)⁻¹Bᵀ`, descending.
fn assembled_shrinkage(b: &DMatrix<f64>, tau: f64) -> Vec<f64> {
    let p = b.ncols();
    let gram = b.transpose() * b + DMatrix::identity(p, p) * tau;
    let s = b * gram.cholesky().unwrap().solve(&b.transpose());
    let mut e: Vec<f64> = SymmetricEigen::new((&s + s.transpose()) * 0.5).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| b.partial_cmp(a).unwrap());
    e
}

#[test]
fn shrinkage_scalar_and_zero_cases() {
    let e = shrinkage_eigenvalues(&dmatrix![1.0], 1.0).unwrap();
    assert_eq!(e.len(), 1);
    assert!((e[0] - 0.5).abs() < 1e-15);
    assert!(matches!(shrinkage_eigenvalues(&DMatrix::zeros(3, 2), 1.0), Err(Error::ZeroMatrix)));
    assert!(matches!(shrinkage_eigenvalues(&dmatrix![1.0], 0.0), Err(Error::InvalidTau(_))));
}

#[test]
fn shrinkage_matches_dense_eigensolver() {
    let mut r = rng(21);
    for _ in 0..20 {
        let b = random_design(&mut r, 3, 2, 1.0);
        let got = shrinkage_eigenvalues(&b, 0.5).unwrap();
        let want = assembled_shrinkage(&b, 0.5);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
    }
}

#[test]
fn shrinkage_bounds_on_random_instances() {
    let mut r = rng(22);
    for case in 0..200 {
        let n = r.random_range(1..=8);
        let p = r.random_range(1..=5);
        let scale = 10f64.powf(r.random_range(-2.0..2.0));
        let b = random_design(&mut r, n, p, scale);
        let tau = 10f64.powf(r.random_range(-3.0..3.0));
        let e = shrinkage_eigenvalues(&b, tau).unwrap();
        assert!(e.iter().all(|&x| (0.0..=1.0 - 1e-12).contains(&x)), "case {case}: {e:?}");
        assert!(e[0] > 0.0);

        let gram = b.transpose() * &b + DMatrix::identity(p, p) * tau;
        let m = DMatrix::identity(n, n) - &b * gram.cholesky().unwrap().solve(&b.transpose());
        let min_eig = SymmetricEigen::new((&m + m.transpose()) * 0.5).eigenvalues.min();
        assert!(min_eig > 0.0, "case {case}");
        assert!((min_eig - (1.0 - e[0])).abs() < 1e-9, "case {case}: {min_eig} vs {}", 1.0 - e[0]);
    }
}

/// `λ_max` from the explicitly assembled `n × n` matrix.
fn assembled_lambda_max(ctx: &PosteriorContext) -> f64 {
    let w = sign_transform(ctx.data().x(), ctx.data().y()).unwrap();
    let q_inv = ctx.q().clone().try_inverse().unwrap();
    let m = &w * q_inv * w.transpose();
    let n = m.nrows();
    let s = &m * (&m + DMatrix::identity(n, n)).try_inverse().unwrap();
    // `W̃W̃ᵀ(W̃W̃ᵀ + I)⁻¹` shares the eigenvalues of `W̃(W̃ᵀW̃ + I)⁻¹W̃ᵀ`.
    s.complex_eigenvalues().iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn lambda_max_matches_assembled_matrix_and_closed_forms() {
    let toy = PosteriorContext::new(
        &ProbitData::new(dmatrix![1.0], &[1.0]).unwrap(),
        &PriorSpec::ProperNormal {
            q: dmatrix![1.0],
            v: dvector![0.0],
        },
    )
    .unwrap();
    assert!((lambda_max(&toy).unwrap() - 0.5).abs() < 1e-15);

    let mut r = rng(23);
    for _ in 0..20 {
        let (data, prior) = random_proper_problem(&mut r, 6, 3);
        let ctx = PosteriorContext::new(&data, &prior).unwrap();
        let got = lambda_max(&ctx).unwrap();
        assert!((got - assembled_lambda_max(&ctx)).abs() < 1e-9);
        assert!(got > 0.0 && got < 1.0);

        let g1 = PosteriorContext::new(&data, &PriorSpec::GPrior { g: 1.0 }).unwrap();
        assert!((lambda_max(&g1).unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn lambda_max_is_monotone_in_design_scale() {
    let mut r = rng(24);
    let (data, prior) = random_proper_problem(&mut r, 8, 2);
    let mut last = 0.0;
    for k in 1..=40 {
        let t = 0.1 * k as f64;
        let scaled = ProbitData::new(data.x() * t, &bools_to_f64(data.y())).unwrap();
        let l = lambda_max(&PosteriorContext::new(&scaled, &prior).unwrap()).unwrap();
        assert!(l >= last - 1e-15, "t = {t}");
        last = l;
    }
}

fn bools_to_f64(y: &[bool]) -> Vec<f64> {
    y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

#[test]
fn mills_bound_reproduced_by_dense_grid() {
    let grid_max = (0..=1_000_000)
        .map(|i| {
            let t = i as f64 * 1e-5;
            t * phi(t) / big_phi(t)
        })
        .fold(0.0, f64::max);
    let lambda = mills_bound();
    assert!((lambda - grid_max).abs() < 1e-8, "{lambda} vs grid {grid_max}");
    assert!((lambda - 0.2945).abs() < 1e-4);
    assert_eq!(mills_term(0.0), 0.0);

    let mut r = rng(25);
    for _ in 0..10_000 {
        let t: f64 = r.random_range(0.0..20.0);
        assert!(lambda >= mills_term(t));
    }
}

#[test]
fn toy_drift_constants() {
    let ctx = PosteriorContext::new(
        &ProbitData::new(dmatrix![1.0], &[1.0]).unwrap(),
        &PriorSpec::ProperNormal {
            q: dmatrix![1.0],
            v: dvector![0.0],
        },
    )
    .unwrap();
    let d = drift_constants(&ctx, None).unwrap();
    let lambda = mills_bound();
    assert!((d.c0 - 0.5).abs() < 1e-15);
    assert!((d.rho - 0.625).abs() < 1e-15);
    assert!((d.a1 - 1.0).abs() < 1e-15);
    assert!((d.a2 - 0.5 * (1.0 + lambda)).abs() < 1e-15);
    assert!((d.l - (1.0 + 1.25 * 0.5 * (1.0 + lambda))).abs() < 1e-15);
}

#[test]
fn zero_v_gives_a1_equal_p_for_every_c() {
    let mut r = rng(26);
    let x = random_design(&mut r, 10, 4, 1.0);
    let y = random_response(&mut r, &x);
    let data = ProbitData::new(x, &y).unwrap();
    let ctx = PosteriorContext::new(&data, &PriorSpec::GPrior { g: 2.0 }).unwrap();
    for c in [0.1, 0.5, 1.0, 3.0] {
        assert_eq!(drift_constants(&ctx, Some(c)).unwrap().a1, 4.0);
    }
}

#[test]
fn rho_below_one_on_random_instances() {
    let mut r = rng(27);
    for _ in 0..100 {
        let n = r.random_range(1..=30);
        let p = r.random_range(1..=6);
        let (data, prior) = random_proper_problem(&mut r, n, p);
        let d = drift_constants(&PosteriorContext::new(&data, &prior).unwrap(), None).unwrap();
        assert!(d.rho < 1.0 && d.rho > 0.0);
        assert!((d.rho - d.lambda_max * (1.0 + d.c_used * d.c_used)).abs() < 1e-15);
        assert!((d.a2 - data.n() as f64 * d.lambda_max * (1.0 + d.big_lambda)).abs() < 1e-12 * d.a2);
    }
}

#[test]
fn zero_design_is_rejected() {
    let data = ProbitData::new(DMatrix::zeros(3, 2), &[1.0, 0.0, 1.0]).unwrap();
    let prior = PriorSpec::ProperNormal {
        q: DMatrix::identity(2, 2),
        v: DVector::zeros(2),
    };
    let ctx = PosteriorContext::new(&data, &prior).unwrap();
    assert!(matches!(drift_constants(&ctx, None), Err(Error::ZeroDesign)));
}

/// Draws from `N(mu, 1)` restricted to one side of zero by plain rejection,
/// falling back to inversion deep in the tail.
fn naive_tn<R: Rng>(rng: &mut R, mu: f64, positive: bool) -> f64 {
    let (m, sign) = if positive { (mu, 1.0) } else { (-mu, -1.0) };
    if m > -2.0 {
        loop {
            let x = m + std_normal(rng);
            if x > 0.0 {
                return sign * x;
            }
        }
    }
    // Inverse-CDF on the tail via bisection.
    let lo_mass = big_phi(m);
    let u: f64 = rng.random();
    let target = 1.0 - u * lo_mass; // Φ(x − m) for the draw x > 0
    let (mut a, mut b) = (-m, -m + 40.0);
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if big_phi(c) < target { a = c } else { b = c }
    }
    sign * (m + 0.5 * (a + b))
}

#[test]
fn exact_drift_matches_monte_carlo() {
    let toy = PosteriorContext::new(
        &ProbitData::new(dmatrix![1.0], &[1.0]).unwrap(),
        &PriorSpec::ProperNormal {
            q: dmatrix![1.0],
            v: dvector![0.0],
        },
    )
    .unwrap();
    assert!((exact_expected_drift(&toy, &dvector![0.0]) - 1.5).abs() < 1e-12);

    let mut r = rng(28);
    let draws: Vec<f64> = (0..1_000_000)
        .map(|_| {
            let z = naive_tn(&mut r, 0.0, true);
            1.0 + 0.5 * z * z
        })
        .collect();
    let (m, se) = mean_se(&draws);
    assert!((m - 1.5).abs() < 3.0 * se, "MC {m} ± {se}");

    for case in 0..5 {
        let (data, prior) = random_proper_problem(&mut r, 8, 3);
        let ctx = PosteriorContext::new(&data, &prior).unwrap();
        let beta = DVector::from_fn(3, |_, _| 1.5 * std_normal(&mut r));
        let p_inv = ctx.precision().clone().try_inverse().unwrap();
        let eta = data.x() * &beta;
        let samples: Vec<f64> = (0..100_000)
            .map(|_| {
                let z = DVector::from_fn(data.n(), |i, _| naive_tn(&mut r, eta[i], data.y()[i]));
                let t = data.x().transpose() * z + ctx.v();
                3.0 + t.dot(&(&p_inv * &t))
            })
            .collect();
        let (m, se) = mean_se(&samples);
        let exact = exact_expected_drift(&ctx, &beta);
        assert!((m - exact).abs() < 4.0 * se, "case {case}: MC {m} ± {se} vs {exact}");
    }
}

#[test]
fn drift_inequality_and_lower_bound_at_random_points() {
    let mut r = rng(29);
    for _ in 0..10 {
        let n = r.random_range(1..=40);
        let p = r.random_range(1..=6);
        let (data, prior) = random_proper_problem(&mut r, n, p);
        let ctx = PosteriorContext::new(&data, &prior).unwrap();
        let d = drift_constants(&ctx, None).unwrap();
        for _ in 0..100 {
            let radius = 10f64.powf(r.random_range(-2.0..3.0));
            let dir = DVector::from_fn(p, |_, _| std_normal(&mut r)).normalize();
            let beta = dir * radius;
            let e = exact_expected_drift(&ctx, &beta);
            assert!(e >= p as f64);
            assert!(e <= d.rho * drift_function(&ctx, &beta) + d.l + 1e-8);
        }
    }
}

#[test]
fn trace_class_boundary_and_rectangular_diagonal() {
    let mut r = rng(30);
    let x = random_design(&mut r, 55, 3, 1.0);
    let y = random_response(&mut r, &x);
    let data = ProbitData::new(x, &y).unwrap();
    let inside = trace_class_check(&data, &PriorSpec::GPrior { g: 3.499999 }).unwrap();
    assert!(inside.condition_a);
    assert_eq!(inside.verdict, Verdict::TraceClass);
    let boundary = trace_class_check(&data, &PriorSpec::GPrior { g: 3.5 }).unwrap();
    assert!(!boundary.condition_a && !boundary.condition_b);
    assert_eq!(boundary.verdict, Verdict::Unknown);

    let diag = ProbitData::new(dmatrix![2.0, 0.0; 0.0, 3.0; 0.0, 0.0], &[1.0, 0.0, 1.0]).unwrap();
    let prior = PriorSpec::ProperNormal {
        q: DMatrix::identity(2, 2),
        v: DVector::zeros(2),
    };
    let v = trace_class_check(&diag, &prior).unwrap();
    assert!(!v.condition_a);
    assert!(v.condition_b);
    assert_eq!(v.verdict, Verdict::TraceClass);
    assert!(v.condition_a_eigenvalues.iter().any(|&e| (e - 9.0).abs() < 1e-12));
}

#[test]
fn trace_class_condition_a_is_row_permutation_invariant() {
    let mut r = rng(31);
    for case in 0..30 {
        let (data, prior) = random_proper_problem(&mut r, 9, 3);
        let mut perm: Vec<usize> = (0..9).collect();
        for i in (1..9).rev() {
            perm.swap(i, r.random_range(0..=i));
        }
        let a = trace_class_check(&data, &prior).unwrap();
        let b = trace_class_check(&data.permuted(&perm), &prior).unwrap();
        assert_eq!(a.condition_a, b.condition_a, "case {case}");
        assert_eq!(a.verdict, b.verdict);
        for (x, y) in a.condition_a_eigenvalues.iter().zip(&b.condition_a_eigenvalues) {
            assert!((x - y).abs() < 1e-10 * x.max(1.0));
        }
    }
}

#[test]
fn chen_shao_hand_cases() {
    let proper = chen_shao_check(&ProbitData::new(dmatrix![1.0; 1.0], &[0.0, 1.0]).unwrap());
    assert!(proper.rank_ok && proper.proper);
    let a = proper.positive_null_vector.unwrap();
    assert!((a[0] - a[1]).abs() < 1e-12 && a[0] >= 1.0);

    let improper = chen_shao_check(&ProbitData::new(dmatrix![1.0; 1.0], &[1.0, 1.0]).unwrap());
    assert!(improper.rank_ok && !improper.proper);
    assert!(improper.positive_null_vector.is_none());

    let wide = chen_shao_check(&ProbitData::new(dmatrix![1.0, 2.0], &[1.0]).unwrap());
    assert!(!wide.rank_ok && !wide.proper);
}

#[test]
fn chen_shao_witnesses_are_valid() {
    let mut r = rng(32);
    let mut feasible = 0;
    let mut infeasible = 0;
    for _ in 0..200 {
        let n = r.random_range(2..=30);
        let p = r.random_range(1..=4).min(n);
        let x = random_design(&mut r, n, p, 1.0);
        let y = random_response(&mut r, &x);
        let data = ProbitData::new(x.clone(), &y).unwrap();
        let verdict = chen_shao_check(&data);
        match &verdict.positive_null_vector {
            Some(a) => {
                feasible += 1;
                let a = DVector::from_column_slice(a);
                let w = sign_transform(&x, data.y()).unwrap();
                assert!((w.transpose() * &a).amax() <= WITNESS_TOL);
                assert!(a.min() >= 1.0 - 1e-12);
            }
            None => {
                infeasible += 1;
                // Separable data: some direction puts every row of W on one side.
                assert!(!verdict.proper);
            }
        }
    }
    assert!(feasible > 20 && infeasible > 20, "{feasible} feasible, {infeasible} infeasible");
}
