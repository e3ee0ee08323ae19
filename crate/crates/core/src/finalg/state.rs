use serde::{Deserialize, Serialize};

use super::element::{mat_from_rep, mat_rep};
use super::{AlgElement, BlockAlgebra, SuperOp};
use crate::error::{QotError, Result};
use crate::linalg::{
    cr, frob_diff, hermitian_eigen, hermitian_residual, imaginary_power, inv_sqrt_pd, log_pd,
    sqrt_psd, CMat, C64, IM,
};

/// Faithfulness floor: states with an eigenvalue below this are rejected
/// rather than regularized, since `ρ^{-1/2}` enters costs and duals.
pub const EPS_FAITH: f64 = 1e-10;

const TOL_TRACE: f64 = 1e-12;

/// A faithful state on a block algebra: a blockwise density matrix with
/// strictly positive spectrum, carrying derived modular data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "StateRep", into = "StateRep")]
pub struct FaithfulState {
    algebra: BlockAlgebra,
    rho: Vec<CMat>,
    sqrt_rho: Vec<CMat>,
    inv_sqrt_rho: Vec<CMat>,
    log_rho: Vec<CMat>,
}

impl FaithfulState {
    pub fn new(algebra: BlockAlgebra, rho: Vec<CMat>) -> Result<Self> {
        if rho.len() != algebra.n_blocks() {
            return Err(QotError::ShapeMismatch(format!(
                "state needs {} blocks, got {}",
                algebra.n_blocks(),
                rho.len()
            )));
        }
        let mut trace = 0.0;
        for (i, (&n, r)) in algebra.block_dims().iter().zip(&rho).enumerate() {
            if r.nrows() != n || r.ncols() != n {
                return Err(QotError::ShapeMismatch(format!("state block {i} must be {n}x{n}")));
            }
            if hermitian_residual(r) > 1e-12 {
                return Err(QotError::InvalidState(format!(
                    "state block {i} is not Hermitian (residual {:.3e})",
                    hermitian_residual(r)
                )));
            }
            let (vals, _) = hermitian_eigen(r);
            if vals[0] < EPS_FAITH {
                return Err(QotError::NotFaithful { min_eig: vals[0], floor: EPS_FAITH });
            }
            trace += r.trace().re;
        }
        if (trace - 1.0).abs() > TOL_TRACE {
            return Err(QotError::InvalidState(format!(
                "total trace must be 1 within {TOL_TRACE:.0e}, got {trace}"
            )));
        }
        let sqrt_rho: Vec<CMat> = rho.iter().map(sqrt_psd).collect();
        for (s, r) in sqrt_rho.iter().zip(&rho) {
            debug_assert!(frob_diff(&(s * s), r) < 1e-12);
        }
        let inv_sqrt_rho = rho.iter().map(inv_sqrt_pd).collect();
        let log_rho = rho.iter().map(log_pd).collect();
        Ok(Self { algebra, rho, sqrt_rho, inv_sqrt_rho, log_rho })
    }

    /// Classical state from a strictly positive probability vector.
    pub fn classical(probs: &[f64]) -> Result<Self> {
        let algebra = BlockAlgebra::classical(probs.len())?;
        let rho = probs.iter().map(|&p| CMat::from_element(1, 1, cr(p))).collect();
        Self::new(algebra, rho)
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn rho(&self) -> &[CMat] {
        &self.rho
    }

    pub fn sqrt_rho(&self) -> &[CMat] {
        &self.sqrt_rho
    }

    pub fn inv_sqrt_rho(&self) -> &[CMat] {
        &self.inv_sqrt_rho
    }

    pub fn log_rho(&self) -> &[CMat] {
        &self.log_rho
    }

    /// Expectation `Σ_i tr(ρ_i a_i)`.
    pub fn expect(&self, a: &AlgElement) -> C64 {
        self.rho.iter().zip(a.blocks()).map(|(r, b)| (r * b).trace()).sum()
    }

    /// The standard vector `Λ = ρ^{1/2}` as an algebra element.
    pub fn standard_vector(&self) -> AlgElement {
        AlgElement::new(&self.algebra, self.sqrt_rho.clone()).expect("shapes match")
    }

    /// The state with blockwise transposed density matrix; this is the
    /// density of the commutant state `μ′` in commutant coordinates.
    pub fn transposed(&self) -> FaithfulState {
        let rho = self.rho.iter().map(|r| r.transpose()).collect();
        Self::new(self.algebra.clone(), rho).expect("transpose preserves validity")
    }

    /// Classical probability vector (abelian algebras only).
    pub fn probs(&self) -> Vec<f64> {
        debug_assert!(self.algebra.abelian());
        self.rho.iter().map(|r| r[(0, 0)].re).collect()
    }

    /// Generator of the modular flow, the derivation `D(a) = i[log ρ, a]`.
    ///
    /// `exp(tD)` reproduces `σ_t(a) = ρ^{it} a ρ^{-it}`.
    pub fn modular_generator(&self) -> SuperOp {
        let log_rho = self.log_rho.clone();
        SuperOp::from_action(&self.algebra, &self.algebra, |a| {
            let blocks = log_rho
                .iter()
                .zip(a.blocks())
                .map(|(h, b)| (h * b - b * h) * IM)
                .collect();
            AlgElement::new(&self.algebra, blocks).expect("shapes match")
        })
    }

    /// The modular flow at time `t`, `σ_t(a) = ρ^{it} a ρ^{-it}`.
    pub fn modular_flow(&self, t: f64) -> SuperOp {
        let u: Vec<CMat> = self.rho.iter().map(|r| imaginary_power(r, t)).collect();
        SuperOp::from_action(&self.algebra, &self.algebra, |a| {
            let blocks = u
                .iter()
                .zip(a.blocks())
                .map(|(u, b)| u * b * u.adjoint())
                .collect();
            AlgElement::new(&self.algebra, blocks).expect("shapes match")
        })
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.algebra == other.algebra
            && self
                .rho
                .iter()
                .zip(&other.rho)
                .all(|(a, b)| crate::linalg::max_abs(&(a - b)) <= tol)
    }
}

#[derive(Serialize, Deserialize)]
struct StateRep {
    blocks: Vec<usize>,
    rho: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<FaithfulState> for StateRep {
    fn from(s: FaithfulState) -> Self {
        StateRep {
            blocks: s.algebra.block_dims().to_vec(),
            rho: s.rho.iter().map(mat_rep).collect(),
        }
    }
}

impl TryFrom<StateRep> for FaithfulState {
    type Error = QotError;
    fn try_from(rep: StateRep) -> Result<Self> {
        let algebra = BlockAlgebra::new(rep.blocks)?;
        let rho = rep.rho.iter().map(|m| mat_from_rep(m)).collect::<Result<_>>()?;
        FaithfulState::new(algebra, rho)
    }
}
