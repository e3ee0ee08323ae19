//! Fixed orthonormal Hilbert-Schmidt bases for matrix blocks.
//!
//! Two bases per block size `n`, both orthonormal for `tr(x† y)` and fixed
//! once so that serialized superoperator matrices are reproducible
//! bit-for-bit:
//!
//! * the *element basis*: real matrices, ordered as all diagonal units
//!   `E_kk` (k = 0..n), then for each pair k < l (lexicographic) the real
//!   symmetric `(E_kl + E_lk)/√2` followed by the real antisymmetric
//!   `(E_kl − E_lk)/√2`. Superoperator matrices are stored in this basis.
//! * the *Hermitian basis*: same diagonal and symmetric generators, with the
//!   antisymmetric one replaced by `i(E_kl − E_lk)/√2`. A matrix is Hermitian
//!   iff its coordinates in this basis are real, which is what the solver
//!   layer uses to parameterize couplings by real vectors.

use crate::linalg::{cr, CMat, CVec, C64, IM};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn unit(n: usize, k: usize, l: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(k, l)] = cr(1.0);
    m
}

/// The element basis for `n×n` matrices (see module docs). Length `n²`.
pub fn element_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push(unit(n, k, k));
    }
    for k in 0..n {
        for l in (k + 1)..n {
            out.push((unit(n, k, l) + unit(n, l, k)).scale(SQRT_HALF));
            out.push((unit(n, k, l) - unit(n, l, k)).scale(SQRT_HALF));
        }
    }
    out
}

/// The Hermitian basis for `n×n` matrices (see module docs). Length `n²`.
pub fn hermitian_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push(unit(n, k, k));
    }
    for k in 0..n {
        for l in (k + 1)..n {
            out.push((unit(n, k, l) + unit(n, l, k)).scale(SQRT_HALF));
            out.push(((unit(n, k, l) - unit(n, l, k)) * IM).scale(SQRT_HALF));
        }
    }
    out
}

/// Coordinates of `m` in the element basis of its size (complex vector).
///
/// Closed form instead of `n²` inner products: the basis is sparse.
pub fn element_coords(m: &CMat) -> CVec {
    let n = m.nrows();
    let mut out = CVec::zeros(n * n);
    let mut idx = 0;
    for k in 0..n {
        out[idx] = m[(k, k)];
        idx += 1;
    }
    for k in 0..n {
        for l in (k + 1)..n {
            out[idx] = (m[(k, l)] + m[(l, k)]) * cr(SQRT_HALF);
            out[idx + 1] = (m[(k, l)] - m[(l, k)]) * cr(SQRT_HALF);
            idx += 2;
        }
    }
    out
}

/// Rebuild a matrix from element-basis coordinates.
pub fn element_from_coords(n: usize, coords: &CVec) -> CMat {
    debug_assert_eq!(coords.len(), n * n);
    let mut m = CMat::zeros(n, n);
    let mut idx = 0;
    for k in 0..n {
        m[(k, k)] = coords[idx];
        idx += 1;
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let s = coords[idx] * cr(SQRT_HALF);
            let a = coords[idx + 1] * cr(SQRT_HALF);
            m[(k, l)] = s + a;
            m[(l, k)] = s - a;
            idx += 2;
        }
    }
    m
}

/// Sign of each element-basis matrix under transposition: `F^T = s F`.
///
/// Diagonal and symmetric generators are even, antisymmetric ones odd.
pub fn element_basis_transpose_signs(n: usize) -> Vec<f64> {
    let mut out = vec![1.0; n];
    for _k in 0..n {
        for _l in (_k + 1)..n {
            out.push(1.0);
            out.push(-1.0);
        }
    }
    out
}

/// Real coordinates of a Hermitian matrix in the Hermitian basis.
pub fn hermitian_coords(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push(m[(k, k)].re);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let avg = (m[(k, l)] + m[(l, k)].conj()) * cr(0.5);
            out.push(2.0 * SQRT_HALF * avg.re);
            out.push(2.0 * SQRT_HALF * avg.im);
        }
    }
    out
}

/// Rebuild a Hermitian matrix from real Hermitian-basis coordinates.
pub fn hermitian_from_coords(n: usize, coords: &[f64]) -> CMat {
    debug_assert_eq!(coords.len(), n * n);
    let mut m = CMat::zeros(n, n);
    let mut idx = 0;
    for k in 0..n {
        m[(k, k)] = cr(coords[idx]);
        idx += 1;
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let z = C64::new(coords[idx], coords[idx + 1]) * cr(SQRT_HALF);
            m[(k, l)] = z;
            m[(l, k)] = z.conj();
            idx += 2;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob_diff, hermitize, hs_inner, max_abs};

    #[test]
    fn element_basis_is_orthonormal() {
        for n in [1, 2, 3] {
            let basis = element_basis(n);
            assert_eq!(basis.len(), n * n);
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let ip = hs_inner(a, b);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((ip.re - expected).abs() < 1e-14 && ip.im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn hermitian_basis_is_orthonormal_and_hermitian() {
        for n in [2, 4] {
            let basis = hermitian_basis(n);
            for (i, a) in basis.iter().enumerate() {
                assert!(max_abs(&(a - a.adjoint())) < 1e-15);
                for (j, b) in basis.iter().enumerate() {
                    let ip = hs_inner(a, b);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((ip.re - expected).abs() < 1e-14 && ip.im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn coords_round_trip() {
        let m = CMat::from_fn(3, 3, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64));
        let c = element_coords(&m);
        assert!(frob_diff(&element_from_coords(3, &c), &m) < 1e-14);

        let h = hermitize(&m);
        let hc = hermitian_coords(&h);
        assert!(frob_diff(&hermitian_from_coords(3, &hc), &h) < 1e-14);
    }
}
