use serde::{Deserialize, Serialize};

use super::AlgElement;
use crate::basis;
use crate::error::{QotError, Result};
use crate::linalg::CMat;

/// A finite-dimensional von Neumann algebra: a direct sum of full complex
/// matrix blocks `M_{n_1} ⊕ … ⊕ M_{n_B}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockAlgebra {
    block_dims: Vec<usize>,
    element_dim: usize,
}

impl BlockAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(QotError::ShapeMismatch("algebra needs at least one block".into()));
        }
        if block_dims.iter().any(|&n| n == 0) {
            return Err(QotError::ShapeMismatch("every block dimension must be >= 1".into()));
        }
        let element_dim = block_dims.iter().map(|&n| n * n).sum();
        Ok(Self { block_dims, element_dim })
    }

    /// The algebra of complex functions on `points` points (all blocks 1×1).
    pub fn classical(points: usize) -> Result<Self> {
        Self::new(vec![1; points])
    }

    /// A single full matrix block `M_n`.
    pub fn full_matrix(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn n_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Complex dimension of the element space, `Σ n_i²`.
    pub fn element_dim(&self) -> usize {
        self.element_dim
    }

    pub fn abelian(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }

    pub fn unit(&self) -> AlgElement {
        let blocks = self.block_dims.iter().map(|&n| CMat::identity(n, n)).collect();
        AlgElement::new(self, blocks).expect("unit has matching shape")
    }

    pub fn zero(&self) -> AlgElement {
        let blocks = self.block_dims.iter().map(|&n| CMat::zeros(n, n)).collect();
        AlgElement::new(self, blocks).expect("zero has matching shape")
    }

    /// The fixed element basis of the whole algebra, block by block.
    pub fn element_basis(&self) -> Vec<AlgElement> {
        self.embedded_basis(basis::element_basis)
    }

    /// The fixed Hermitian basis of the whole algebra, block by block.
    pub fn hermitian_element_basis(&self) -> Vec<AlgElement> {
        self.embedded_basis(basis::hermitian_basis)
    }

    fn embedded_basis(&self, f: impl Fn(usize) -> Vec<CMat>) -> Vec<AlgElement> {
        let mut out = Vec::with_capacity(self.element_dim);
        for (i, &n) in self.block_dims.iter().enumerate() {
            for b in f(n) {
                let mut blocks: Vec<CMat> =
                    self.block_dims.iter().map(|&m| CMat::zeros(m, m)).collect();
                blocks[i] = b;
                out.push(AlgElement::new(self, blocks).expect("basis block shapes match"));
            }
        }
        out
    }
}

impl TryFrom<Vec<usize>> for BlockAlgebra {
    type Error = QotError;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        BlockAlgebra::new(dims)
    }
}

impl From<BlockAlgebra> for Vec<usize> {
    fn from(a: BlockAlgebra) -> Vec<usize> {
        a.block_dims
    }
}
