//! Real-coordinate layout for block-pair matrix families.
//!
//! Couplings (and Choi matrices of maps) are families of Hermitian matrices
//! indexed by a (source block, target block) pair; this maps the whole
//! family to one real vector through the Hermitian basis of each pair block
//! and back.

use nalgebra::DVector;

use crate::basis;
use crate::linalg::CMat;

#[derive(Debug, Clone)]
pub struct PairLayout {
    a_dims: Vec<usize>,
    b_dims: Vec<usize>,
    pair_dims: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl PairLayout {
    pub fn new(a_dims: &[usize], b_dims: &[usize]) -> Self {
        let mut pair_dims = Vec::with_capacity(a_dims.len() * b_dims.len());
        for &n in a_dims {
            for &m in b_dims {
                pair_dims.push(n * m);
            }
        }
        let mut offsets = Vec::with_capacity(pair_dims.len());
        let mut total = 0;
        for &d in &pair_dims {
            offsets.push(total);
            total += d * d;
        }
        Self { a_dims: a_dims.to_vec(), b_dims: b_dims.to_vec(), pair_dims, offsets, total }
    }

    pub fn a_dims(&self) -> &[usize] {
        &self.a_dims
    }

    pub fn b_dims(&self) -> &[usize] {
        &self.b_dims
    }

    pub fn n_pairs(&self) -> usize {
        self.pair_dims.len()
    }

    pub fn pair_dims(&self) -> &[usize] {
        &self.pair_dims
    }

    pub fn offset(&self, t: usize) -> usize {
        self.offsets[t]
    }

    /// Total real dimension, `Σ (n_i m_j)²`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Total Hilbert dimension `Σ n_i m_j` of the underlying tensor blocks.
    pub fn hilbert_dim(&self) -> usize {
        self.pair_dims.iter().sum()
    }

    pub fn pack(&self, blocks: &[CMat]) -> DVector<f64> {
        debug_assert_eq!(blocks.len(), self.pair_dims.len());
        let mut x = DVector::zeros(self.total);
        for (t, blk) in blocks.iter().enumerate() {
            for (k, &c) in basis::hermitian_coords(blk).iter().enumerate() {
                x[self.offsets[t] + k] = c;
            }
        }
        x
    }

    pub fn unpack(&self, x: &DVector<f64>) -> Vec<CMat> {
        self.pair_dims
            .iter()
            .enumerate()
            .map(|(t, &d)| {
                let coords: Vec<f64> = (0..d * d).map(|k| x[self.offsets[t] + k]).collect();
                basis::hermitian_from_coords(d, &coords)
            })
            .collect()
    }
}
