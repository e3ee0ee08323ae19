//! Real affine row systems `A x = b` with orthonormalized rows.
//!
//! Raw constraint systems assembled over full product bases are heavily
//! redundant; a modified Gram-Schmidt pass with a rank tolerance compresses
//! them, keeps the right-hand side consistent, and makes the projection onto
//! the affine set a single multiply.

use nalgebra::{DMatrix, DVector};

use crate::error::{QotError, Result};

/// An affine set `{x : A x = b}` with `A Aᵀ = I`.
#[derive(Debug, Clone)]
pub struct AffineRows {
    basis: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl AffineRows {
    /// Compress raw rows by modified Gram-Schmidt at the given tolerance.
    ///
    /// Rows whose residual after orthogonalization is below `tol` (relative
    /// to the largest row norm) are dropped; if a dropped row carries a
    /// non-negligible right-hand side the system is inconsistent.
    pub fn from_raw(rows: &[Vec<f64>], rhs: &[f64], dim: usize, tol: f64) -> Result<Self> {
        let mut kept: Vec<(DVector<f64>, f64)> = Vec::new();
        let scale = rows
            .iter()
            .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(1.0_f64, f64::max);
        for (row, &b) in rows.iter().zip(rhs) {
            debug_assert_eq!(row.len(), dim);
            let mut v = DVector::from_column_slice(row);
            let mut beta = b;
            for (q, bq) in &kept {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
                beta -= c * bq;
            }
            // second orthogonalization pass for numerical hygiene
            for (q, bq) in &kept {
                let c = q.dot(&v);
                if c != 0.0 {
                    v.axpy(-c, q, 1.0);
                    beta -= c * bq;
                }
            }
            let norm = v.norm();
            if norm > tol * scale {
                v /= norm;
                kept.push((v, beta / norm));
            } else if beta.abs() > 1e-8 * scale.max(b.abs()) {
                return Err(QotError::SolverFailure(format!(
                    "inconsistent affine system: dropped row has rhs {beta:.3e}"
                )));
            }
        }
        let m = kept.len();
        let mut basis = DMatrix::zeros(m, dim);
        let mut rhs_c = DVector::zeros(m);
        for (i, (q, bq)) in kept.into_iter().enumerate() {
            basis.row_mut(i).copy_from(&q.transpose());
            rhs_c[i] = bq;
        }
        Ok(Self { basis, rhs: rhs_c })
    }

    pub fn n_rows(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// Orthogonal projection onto the affine set.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut r = &self.basis * x;
        r -= &self.rhs;
        x - self.basis.transpose() * r
    }

    /// Euclidean residual `‖A x − b‖`.
    pub fn residual(&self, x: &DVector<f64>) -> f64 {
        (&self.basis * x - &self.rhs).norm()
    }
}

/// Minimum-norm least squares solution of `A x = b` via SVD.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, tol).expect("svd solve with both factors requested")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compresses_redundant_rows() {
        let rows = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0], // dependent
        ];
        let rhs = vec![2.0, 3.0, 5.0];
        let aff = AffineRows::from_raw(&rows, &rhs, 3, 1e-11).unwrap();
        assert_eq!(aff.n_rows(), 2);
        let x = DVector::from_column_slice(&[0.0, 0.0, 7.0]);
        let p = aff.project(&x);
        assert!((p[0] - 2.0).abs() < 1e-12 && (p[1] - 3.0).abs() < 1e-12 && (p[2] - 7.0).abs() < 1e-12);
        assert!(aff.residual(&p) < 1e-12);
    }

    #[test]
    fn detects_inconsistency() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let rhs = vec![1.0, 2.0];
        assert!(AffineRows::from_raw(&rows, &rhs, 2, 1e-11).is_err());
    }
}
