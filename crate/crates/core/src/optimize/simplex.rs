//! Dense two-phase primal simplex with Bland's rule.
//!
//! Solves `min c·x` subject to `A x = b`, `x ≥ 0` for the small classical
//! transport problems; `A` is expected row-independent (the caller
//! compresses first). Vertex solutions make the classical path exact up to
//! roundoff, which the near-zero distances rely on.

use nalgebra::{DMatrix, DVector};

use crate::error::{QotError, Result};

const EPS: f64 = 1e-11;

pub struct LpSolution {
    pub x: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
}

pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<LpSolution> {
    let m = a.nrows();
    let n = a.ncols();

    // orient rows so b >= 0, then phase 1 with artificial variables
    let mut tableau = DMatrix::zeros(m, n + m);
    let mut rhs = DVector::zeros(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tableau[(i, j)] = sign * a[(i, j)];
        }
        tableau[(i, n + i)] = 1.0;
        rhs[i] = sign * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let phase1: DVector<f64> =
        DVector::from_fn(n + m, |j, _| if j >= n { 1.0 } else { 0.0 });
    let mut iterations = run_simplex(&mut tableau, &mut rhs, &mut basis, &phase1, None)?;
    let phase1_obj: f64 = basis
        .iter()
        .enumerate()
        .map(|(i, &j)| if j >= n { rhs[i] } else { 0.0 })
        .sum();
    if phase1_obj > 1e-8 {
        return Err(QotError::SolverFailure(format!(
            "LP infeasible (phase-1 objective {phase1_obj:.3e})"
        )));
    }
    // drive remaining artificial variables out of the basis
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tableau[(i, j)].abs() > 1e-9) {
                pivot(&mut tableau, &mut rhs, &mut basis, i, j);
            }
        }
    }

    // phase 2 restricted to the structural columns
    let full_cost: DVector<f64> = DVector::from_fn(n + m, |j, _| if j < n { c[j] } else { 0.0 });
    iterations += run_simplex(&mut tableau, &mut rhs, &mut basis, &full_cost, Some(n))?;

    let mut x = DVector::zeros(n);
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = rhs[i];
        }
    }
    let value = c.dot(&x);
    Ok(LpSolution { x, value, iterations })
}

fn pivot(
    tableau: &mut DMatrix<f64>,
    rhs: &mut DVector<f64>,
    basis: &mut [usize],
    row: usize,
    col: usize,
) {
    let piv = tableau[(row, col)];
    for j in 0..tableau.ncols() {
        tableau[(row, j)] /= piv;
    }
    rhs[row] /= piv;
    for i in 0..tableau.nrows() {
        if i != row {
            let f = tableau[(i, col)];
            if f != 0.0 {
                for j in 0..tableau.ncols() {
                    tableau[(i, j)] -= f * tableau[(row, j)];
                }
                rhs[i] -= f * rhs[row];
            }
        }
    }
    basis[row] = col;
}

/// Bland-rule simplex loop; `restrict` limits entering columns to `0..k`.
fn run_simplex(
    tableau: &mut DMatrix<f64>,
    rhs: &mut DVector<f64>,
    basis: &mut [usize],
    cost: &DVector<f64>,
    restrict: Option<usize>,
) -> Result<usize> {
    let m = tableau.nrows();
    let ncols = restrict.unwrap_or(tableau.ncols());
    for it in 0..20_000 {
        // reduced costs via the basic cost multipliers
        let mut entering = None;
        'cols: for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut reduced = cost[j];
            for i in 0..m {
                reduced -= cost[basis[i]] * tableau[(i, j)];
            }
            if reduced < -EPS {
                entering = Some(j);
                break 'cols; // Bland: smallest eligible index
            }
        }
        let Some(col) = entering else {
            return Ok(it);
        };
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            let t = tableau[(i, col)];
            if t > EPS {
                let ratio = rhs[i] / t;
                match leaving {
                    None => leaving = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - EPS
                            || (ratio < br + EPS && basis[i] < basis[bi])
                        {
                            leaving = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leaving else {
            return Err(QotError::SolverFailure("LP unbounded".into()));
        };
        pivot(tableau, rhs, basis, row, col);
    }
    Err(QotError::SolverFailure("simplex iteration limit".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_transport_lp() {
        // classic 2x2 transport: mu = (0.3, 0.7), nu = (0.6, 0.4),
        // costs favor the diagonal
        let a = DMatrix::from_row_slice(
            3,
            4,
            &[
                1.0, 1.0, 0.0, 0.0, // row p=1
                0.0, 0.0, 1.0, 1.0, // row p=2
                1.0, 0.0, 1.0, 0.0, // column r=1
            ],
        );
        let b = DVector::from_column_slice(&[0.3, 0.7, 0.6]);
        let c = DVector::from_column_slice(&[0.0, 1.0, 1.0, 0.0]);
        let sol = solve(&a, &b, &c).unwrap();
        // mass 0.3 on (1,1), 0.3 on (2,1), 0.4 on (2,2): value = 0.3
        assert!((sol.value - 0.3).abs() < 1e-12);
        assert!((sol.x[0] - 0.3).abs() < 1e-12);
        assert!((sol.x[2] - 0.3).abs() < 1e-12);
        assert!((sol.x[3] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let a = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let b = DVector::from_column_slice(&[1.0, 1.0]);
        let c = DVector::from_column_slice(&[1.0]);
        assert!(solve(&a, &b, &c).is_err());
    }
}
