//! Phase-one simplex for the feasibility problem `A s = b, s ≥ 0`.
//!
//! Dense tableau with Bland's rule, so it terminates on degenerate problems.
//! Sized for the handful-of-constraints systems the propriety check produces.

use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-11;

/// Outcome of a phase-one solve.
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Feasible(DVector<f64>),
    /// Phase one stopped with a positive sum of artificial variables.
    Infeasible { residual: f64 },
}

pub fn phase_one(a: &DMatrix<f64>, b: &DVector<f64>) -> Feasibility {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "phase_one: row count mismatch");
    let width = n + m + 1;
    let rhs = width - 1;
    let scale = a.amax().max(b.amax()).max(1.0);

    // Rows 0..m are constraints, row m is the phase-one objective.
    let mut t = DMatrix::<f64>::zeros(m + 1, width);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, rhs)] = sign * b[i];
    }
    for j in 0..width {
        if j < n || j == rhs {
            let s: f64 = (0..m).map(|i| t[(i, j)]).sum();
            t[(m, j)] = -s;
        }
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (n + m + 10);
    for _ in 0..max_iter {
        let Some(enter) = (0..n + m).find(|&j| t[(m, j)] < -PIVOT_TOL * scale) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let coef = t[(i, enter)];
            if coef > PIVOT_TOL * scale {
                let ratio = t[(i, rhs)] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        // Objective is bounded below by zero, so an entering column always
        // has a positive entry; a missing one only happens on roundoff.
        let Some(row) = leave else { break };
        pivot(&mut t, row, enter);
        basis[row] = enter;
    }

    let residual = -t[(m, rhs)];
    if residual > 1e-9 * scale {
        return Feasibility::Infeasible { residual };
    }
    let mut s = DVector::zeros(n);
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            s[j] = t[(i, rhs)].max(0.0);
        }
    }
    Feasibility::Feasible(s)
}

fn pivot(t: &mut DMatrix<f64>, row: usize, col: usize) {
    let p = t[(row, col)];
    let width = t.ncols();
    for j in 0..width {
        t[(row, j)] /= p;
    }
    for i in 0..t.nrows() {
        if i != row {
            let f = t[(i, col)];
            if f != 0.0 {
                for j in 0..width {
                    let delta = f * t[(row, j)];
                    t[(i, j)] -= delta;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn finds_point_on_simple_system() {
        let a = dmatrix![1.0, 1.0, 0.0; 0.0, 1.0, 1.0];
        let b = dvector![2.0, 3.0];
        match phase_one(&a, &b) {
            Feasibility::Feasible(s) => {
                assert!((&a * &s - &b).amax() < 1e-12);
                assert!(s.iter().all(|&x| x >= 0.0));
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_system() {
        // s1 + s2 = -1 has no nonnegative solution.
        let a = dmatrix![1.0, 1.0];
        let b = dvector![-1.0];
        assert!(matches!(phase_one(&a, &b), Feasibility::Infeasible { .. }));
    }

    #[test]
    fn handles_degenerate_rows() {
        let a = dmatrix![1.0, -1.0; 2.0, -2.0];
        let b = dvector![0.0, 0.0];
        assert!(matches!(phase_one(&a, &b), Feasibility::Feasible(_)));
    }
}
