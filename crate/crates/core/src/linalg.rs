//! Dense complex linear algebra helpers shared by the whole crate.
//!
//! Everything operates on `DMatrix<Complex<f64>>`. Hermitian eigenproblems
//! are solved through nalgebra's `SymmetricEigen`, which handles Hermitian
//! complex matrices; results are returned with eigenvalues sorted ascending
//! so downstream code is deterministic.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const IM: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Symmetrize to the nearest Hermitian matrix, (M + M†)/2.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Max absolute deviation from Hermitianity.
pub fn hermitian_residual(m: &CMat) -> f64 {
    (m - m.adjoint()).camax()
}

/// Max absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.camax()
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(vals, vecs)` with `m = vecs * diag(vals) * vecs†`.
pub fn hermitian_eigen(m: &CMat) -> (DVector<f64>, CMat) {
    let n = m.nrows();
    if n == 1 {
        return (DVector::from_element(1, m[(0, 0)].re), CMat::identity(1, 1));
    }
    let se = nalgebra::linalg::SymmetricEigen::new(hermitize(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| se.eigenvalues[i]));
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Apply a real scalar function to a Hermitian matrix through its spectrum.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMat::from_diagonal(&vals.map(|x| cr(f(x))));
    &vecs * d * vecs.adjoint()
}

/// Principal square root of a PSD Hermitian matrix (negative noise clamped).
pub fn sqrt_psd(m: &CMat) -> CMat {
    hermitian_map(m, |x| x.max(0.0).sqrt())
}

/// Inverse square root of a positive definite Hermitian matrix.
pub fn inv_sqrt_pd(m: &CMat) -> CMat {
    hermitian_map(m, |x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt())
}

/// Matrix logarithm of a positive definite Hermitian matrix.
pub fn log_pd(m: &CMat) -> CMat {
    hermitian_map(m, |x| x.max(f64::MIN_POSITIVE).ln())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig(m: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(m);
    vals[0]
}

/// Project a Hermitian matrix onto the PSD cone (eigenvalue clipping).
pub fn psd_project(m: &CMat) -> CMat {
    hermitian_map(m, |x| x.max(0.0))
}

/// `rho^{it}` for Hermitian positive definite `rho` and real `t`.
pub fn imaginary_power(rho: &CMat, t: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(rho);
    let d = CMat::from_diagonal(&vals.map(|x| {
        let phase = t * x.max(f64::MIN_POSITIVE).ln();
        C64::new(phase.cos(), phase.sin())
    }));
    &vecs * d * vecs.adjoint()
}

/// Matrix exponential by scaling-and-squaring with a Taylor kernel.
pub fn expm(m: &CMat) -> CMat {
    let n = m.nrows();
    let norm = max_abs(m) * n as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let a = m.scale(1.0 / (1u64 << s) as f64);
    let mut result = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..40 {
        term = &term * &a;
        term /= cr(k as f64);
        result += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let z = a[(i, j)];
            if z != ZERO {
                for k in 0..rb {
                    for l in 0..cb {
                        out[(i * rb + k, j * cb + l)] = z * b[(k, l)];
                    }
                }
            }
        }
    }
    out
}

/// Partial trace over the first factor of a matrix on `C^da ⊗ C^db`.
pub fn partial_trace_first(m: &CMat, da: usize, db: usize) -> CMat {
    debug_assert_eq!(m.nrows(), da * db);
    let mut out = CMat::zeros(db, db);
    for k in 0..db {
        for l in 0..db {
            let mut s = ZERO;
            for j in 0..da {
                s += m[(j * db + k, j * db + l)];
            }
            out[(k, l)] = s;
        }
    }
    out
}

/// Partial trace over the second factor of a matrix on `C^da ⊗ C^db`.
pub fn partial_trace_second(m: &CMat, da: usize, db: usize) -> CMat {
    debug_assert_eq!(m.nrows(), da * db);
    let mut out = CMat::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut s = ZERO;
            for k in 0..db {
                s += m[(i * db + k, j * db + k)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Hilbert-Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    let mut s = ZERO;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].conj() * b[(i, j)];
        }
    }
    s
}

/// Frobenius norm of the difference.
pub fn frob_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm()
}
