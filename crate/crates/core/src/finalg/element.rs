use serde::{Deserialize, Serialize};

use super::BlockAlgebra;
use crate::basis;
use crate::error::{QotError, Result};
use crate::linalg::{cr, hs_inner, max_abs, CMat, CVec, C64, ZERO};

/// An element of a block algebra: one complex matrix per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementRep", into = "ElementRep")]
pub struct AlgElement {
    dims: Vec<usize>,
    blocks: Vec<CMat>,
}

impl AlgElement {
    pub fn new(algebra: &BlockAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        let dims = algebra.block_dims().to_vec();
        if blocks.len() != dims.len() {
            return Err(QotError::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                dims.len(),
                blocks.len()
            )));
        }
        for (i, (&n, b)) in dims.iter().zip(&blocks).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(QotError::ShapeMismatch(format!(
                    "block {i} must be {n}x{n}, got {}x{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { dims, blocks })
    }

    /// Classical element: one scalar per point, on the all-1×1 algebra.
    pub fn classical(values: &[f64]) -> Self {
        let blocks = values.iter().map(|&v| CMat::from_element(1, 1, cr(v))).collect();
        Self { dims: vec![1; values.len()], blocks }
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [CMat] {
        &mut self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn matches(&self, algebra: &BlockAlgebra) -> bool {
        self.dims == algebra.block_dims()
    }

    pub fn adjoint(&self) -> Self {
        Self { dims: self.dims.clone(), blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            blocks: self.blocks.iter().map(|b| b.transpose()).collect(),
        }
    }

    /// Entrywise complex conjugate, `conj(a) = (a*)ᵀ`.
    pub fn conj(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            blocks: self.blocks.iter().map(|b| b.map(|z| z.conj())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dims, other.dims);
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect();
        Self { dims: self.dims.clone(), blocks }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dims, other.dims);
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect();
        Self { dims: self.dims.clone(), blocks }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dims, other.dims);
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect();
        Self { dims: self.dims.clone(), blocks }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { dims: self.dims.clone(), blocks: self.blocks.iter().map(|b| b * z).collect() }
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| hs_inner(a, b)).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.hs_inner(self).re.max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| max_abs(&(a - b)))
            .fold(0.0, f64::max)
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Complex coordinates in the fixed element basis, block by block.
    pub fn coords(&self) -> CVec {
        let total: usize = self.dims.iter().map(|&n| n * n).sum();
        let mut out = CVec::zeros(total);
        let mut off = 0;
        for b in &self.blocks {
            let c = basis::element_coords(b);
            out.rows_mut(off, c.len()).copy_from(&c);
            off += c.len();
        }
        out
    }

    /// Rebuild an element from coordinates in the fixed element basis.
    pub fn from_coords(algebra: &BlockAlgebra, coords: &CVec) -> Self {
        debug_assert_eq!(coords.len(), algebra.element_dim());
        let mut blocks = Vec::with_capacity(algebra.n_blocks());
        let mut off = 0;
        for &n in algebra.block_dims() {
            let c = CVec::from_iterator(n * n, (0..n * n).map(|t| coords[off + t]));
            blocks.push(basis::element_from_coords(n, &c));
            off += n * n;
        }
        Self { dims: algebra.block_dims().to_vec(), blocks }
    }

    /// Scalar values of a classical (abelian) element.
    pub fn classical_values(&self) -> Vec<C64> {
        debug_assert!(self.dims.iter().all(|&n| n == 1));
        self.blocks.iter().map(|b| b[(0, 0)]).collect()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

#[derive(Serialize, Deserialize)]
struct ElementRep(Vec<Vec<Vec<[f64; 2]>>>);

impl From<AlgElement> for ElementRep {
    fn from(e: AlgElement) -> Self {
        ElementRep(e.blocks.iter().map(mat_rep).collect())
    }
}

impl TryFrom<ElementRep> for AlgElement {
    type Error = QotError;
    fn try_from(rep: ElementRep) -> Result<Self> {
        let blocks: Vec<CMat> = rep.0.iter().map(|m| mat_from_rep(m)).collect::<Result<_>>()?;
        let dims: Vec<usize> = blocks.iter().map(|b| b.nrows()).collect();
        let algebra = BlockAlgebra::new(dims)?;
        AlgElement::new(&algebra, blocks)
    }
}

/// Row-major nested-array representation with complex entries as `[re, im]`.
pub(crate) fn mat_rep(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn mat_from_rep(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let nr = rows.len();
    if nr == 0 {
        return Err(QotError::ShapeMismatch("empty matrix".into()));
    }
    let nc = rows[0].len();
    if rows.iter().any(|r| r.len() != nc) {
        return Err(QotError::ShapeMismatch("ragged matrix rows".into()));
    }
    let mut m = CMat::zeros(nr, nc);
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

/// Row-major vectorization of a matrix (nalgebra's internal order is
/// column-major, so this is explicit).
pub(crate) fn vec_row_major(m: &CMat) -> CVec {
    let (r, c) = m.shape();
    let mut v = CVec::zeros(r * c);
    for i in 0..r {
        for j in 0..c {
            v[i * c + j] = m[(i, j)];
        }
    }
    v
}

#[allow(dead_code)]
pub(crate) fn zero_like(dims: &[usize]) -> Vec<CMat> {
    dims.iter().map(|&n| CMat::from_element(n, n, ZERO)).collect()
}
