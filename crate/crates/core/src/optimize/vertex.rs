//! Exact optimum over the classical feasible polytope by basis enumeration.
//!
//! Every vertex of `{x ≥ 0 : A x = b}` is a basic solution supported on a
//! column subset of size rank(A); enumerating all such subsets and keeping
//! the feasible ones gives the global optimum of a linear cost without any
//! iterative method. Only used as an independent oracle on small instances.

use nalgebra::{DMatrix, DVector};

use crate::error::{QotError, Result};

pub fn enumerate_optimum(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
) -> Result<(f64, DVector<f64>)> {
    let m = a.nrows();
    let n = a.ncols();
    if n > 20 {
        return Err(QotError::TooLarge(format!("{n} variables for vertex enumeration")));
    }
    let mut subset: Vec<usize> = Vec::with_capacity(m);
    let mut best: Option<(f64, DVector<f64>)> = None;
    enumerate(a, b, c, 0, &mut subset, m, n, &mut best);
    best.ok_or_else(|| QotError::SolverFailure("no feasible vertex found".into()))
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    start: usize,
    subset: &mut Vec<usize>,
    m: usize,
    n: usize,
    best: &mut Option<(f64, DVector<f64>)>,
) {
    if subset.len() == m {
        let mut sub = DMatrix::zeros(m, m);
        for (col, &j) in subset.iter().enumerate() {
            sub.set_column(col, &a.column(j));
        }
        let lu = sub.clone().lu();
        if let Some(xs) = lu.solve(b) {
            if xs.iter().all(|&v| v >= -1e-9) && (&sub * &xs - b).amax() < 1e-9 {
                let mut x = DVector::zeros(n);
                for (col, &j) in subset.iter().enumerate() {
                    x[j] = xs[col].max(0.0);
                }
                let value = c.dot(&x);
                match best {
                    Some((bv, _)) if *bv <= value => {}
                    _ => *best = Some((value, x)),
                }
            }
        }
        return;
    }
    let needed = m - subset.len();
    if n - start < needed {
        return;
    }
    for j in start..n {
        subset.push(j);
        enumerate(a, b, c, j + 1, subset, m, n, best);
        subset.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_simplex_on_small_lp() {
        let a = DMatrix::from_row_slice(
            3,
            4,
            &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0],
        );
        let b = DVector::from_column_slice(&[0.3, 0.7, 0.6]);
        let c = DVector::from_column_slice(&[0.0, 1.0, 1.0, 0.0]);
        let (value, x) = enumerate_optimum(&a, &b, &c).unwrap();
        let lp = super::super::simplex::solve(&a, &b, &c).unwrap();
        assert!((value - lp.value).abs() < 1e-12);
        assert!((&a * &x - &b).amax() < 1e-9);
    }
}
