use serde::{Deserialize, Serialize};

use super::element::{mat_from_rep, mat_rep, vec_row_major};
use super::{AlgElement, BlockAlgebra, FaithfulState, SuperOp};
use crate::error::{QotError, Result};
use crate::linalg::{
    cr, hermitian_eigen, hermitian_residual, hermitize, kron, max_abs, partial_trace_first,
    partial_trace_second, CMat, C64,
};

const TOL_PSD: f64 = 1e-10;
const TOL_TRACE: f64 = 1e-12;
/// Marginal residual above which a plan is rejected outright.
pub const TOL_MARGINAL: f64 = 1e-6;

/// A transport plan between states on two block algebras, stored as a
/// blockwise density matrix on the pairwise tensor blocks.
///
/// Block `(i, j)` lives on `C^{n_i} ⊗ C^{m_j}` and the functional reads
/// `ω(a ⊗ π′(c)) = Σ_ij tr(Ω_ij (a_i ⊗ c_j))`. With this convention `Ω` is
/// PSD exactly when `ω` is a state, the first marginal (partial trace over
/// the second leg) is `ρ_μ`, and the second marginal (partial trace over the
/// first leg) is `ρ_νᵀ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CouplingRep", into = "CouplingRep")]
pub struct Coupling {
    a_dims: Vec<usize>,
    b_dims: Vec<usize>,
    blocks: Vec<CMat>,
}

impl Coupling {
    pub fn new(a: &BlockAlgebra, b: &BlockAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        let c = Self::new_unchecked(a, b, blocks)?;
        c.validate()?;
        Ok(c)
    }

    /// Shape-checked construction without the PSD/trace validation; used by
    /// the solver layer on iterates that are only approximately feasible.
    pub fn new_unchecked(a: &BlockAlgebra, b: &BlockAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        let a_dims = a.block_dims().to_vec();
        let b_dims = b.block_dims().to_vec();
        if blocks.len() != a_dims.len() * b_dims.len() {
            return Err(QotError::ShapeMismatch(format!(
                "coupling needs {} blocks, got {}",
                a_dims.len() * b_dims.len(),
                blocks.len()
            )));
        }
        for (i, &n) in a_dims.iter().enumerate() {
            for (j, &m) in b_dims.iter().enumerate() {
                let blk = &blocks[i * b_dims.len() + j];
                if blk.nrows() != n * m || blk.ncols() != n * m {
                    return Err(QotError::ShapeMismatch(format!(
                        "coupling block ({i},{j}) must be {0}x{0}",
                        n * m
                    )));
                }
            }
        }
        Ok(Self { a_dims, b_dims, blocks })
    }

    /// Hermitian/PSD within 1e-10 per block, total trace 1 within 1e-12.
    pub fn validate(&self) -> Result<()> {
        let mut trace = 0.0;
        for blk in &self.blocks {
            let h = hermitian_residual(blk);
            if h > TOL_PSD {
                return Err(QotError::InvalidCoupling(format!(
                    "block not Hermitian (residual {h:.3e})"
                )));
            }
            let min = hermitian_eigen(&hermitize(blk)).0[0];
            if min < -TOL_PSD {
                return Err(QotError::InvalidCoupling(format!(
                    "block not PSD (min eigenvalue {min:.3e})"
                )));
            }
            trace += blk.trace().re;
        }
        if (trace - 1.0).abs() > TOL_TRACE {
            return Err(QotError::InvalidCoupling(format!(
                "total trace must be 1 within {TOL_TRACE:.0e}, got {trace}"
            )));
        }
        Ok(())
    }

    pub fn a_dims(&self) -> &[usize] {
        &self.a_dims
    }

    pub fn b_dims(&self) -> &[usize] {
        &self.b_dims
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize, j: usize) -> &CMat {
        &self.blocks[i * self.b_dims.len() + j]
    }

    /// The pairing `ω(a ⊗ π′(c))`.
    pub fn pair(&self, a: &AlgElement, c: &AlgElement) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (i, _) in self.a_dims.iter().enumerate() {
            for (j, _) in self.b_dims.iter().enumerate() {
                s += (self.block(i, j) * kron(a.block(i), c.block(j))).trace();
            }
        }
        s
    }

    /// First marginal as blockwise density matrices (should equal `ρ_μ`).
    pub fn marginal_a(&self) -> Vec<CMat> {
        self.a_dims
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut acc = CMat::zeros(n, n);
                for (j, &m) in self.b_dims.iter().enumerate() {
                    acc += partial_trace_second(self.block(i, j), n, m);
                }
                acc
            })
            .collect()
    }

    /// Second marginal, transposed back to `B` coordinates (should equal
    /// `ρ_ν`).
    pub fn marginal_b(&self) -> Vec<CMat> {
        self.b_dims
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                let mut acc = CMat::zeros(m, m);
                for (i, &n) in self.a_dims.iter().enumerate() {
                    acc += partial_trace_first(self.block(i, j), n, m);
                }
                acc.transpose()
            })
            .collect()
    }

    /// Max-abs deviation of both marginals from the given states.
    pub fn marginal_residual(&self, mu: &FaithfulState, nu: &FaithfulState) -> f64 {
        let mut worst: f64 = 0.0;
        for (got, want) in self.marginal_a().iter().zip(mu.rho()) {
            worst = worst.max(max_abs(&(got - want)));
        }
        for (got, want) in self.marginal_b().iter().zip(nu.rho()) {
            worst = worst.max(max_abs(&(got - want)));
        }
        worst
    }

    /// The product plan `μ ⊙ ν′`, always a transport plan of every class.
    pub fn product(mu: &FaithfulState, nu: &FaithfulState) -> Coupling {
        let a = mu.algebra();
        let b = nu.algebra();
        let mut blocks = Vec::with_capacity(a.n_blocks() * b.n_blocks());
        for ra in mu.rho() {
            for rb in nu.rho() {
                blocks.push(kron(ra, &rb.transpose()));
            }
        }
        Self::new(a, b, blocks).expect("product of faithful states is a valid coupling")
    }

    /// Classical coupling matrix entries `ω_pr` (abelian pairs only), row
    /// index p over A-points, column index r over B-points.
    pub fn classical_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.a_dims.len();
        let n = self.b_dims.len();
        (0..m)
            .map(|p| (0..n).map(|r| self.block(p, r)[(0, 0)].re).collect())
            .collect()
    }

    /// Build a classical coupling from its matrix of weights.
    pub fn from_classical_matrix(w: &[Vec<f64>]) -> Result<Coupling> {
        let m = w.len();
        let n = w.first().map(|r| r.len()).unwrap_or(0);
        let a = BlockAlgebra::classical(m)?;
        let b = BlockAlgebra::classical(n)?;
        let mut blocks = Vec::with_capacity(m * n);
        for row in w {
            if row.len() != n {
                return Err(QotError::ShapeMismatch("ragged coupling matrix".into()));
            }
            for &x in row {
                blocks.push(CMat::from_element(1, 1, cr(x)));
            }
        }
        Self::new(&a, &b, blocks)
    }

    pub fn max_abs_diff(&self, other: &Coupling) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| max_abs(&(a - b)))
            .fold(0.0, f64::max)
    }
}

/// The maximally entangled coupling `δ_μ` of a state with its commutant
/// state: rank one per matching block pair, with eigenvector the
/// vectorization of `ρ^{1/2}`; pairs as `tr(ρ^{1/2} b ρ^{1/2} cᵀ)`.
pub fn delta_state(state: &FaithfulState) -> Coupling {
    let alg = state.algebra();
    let nb = alg.n_blocks();
    let mut blocks = Vec::with_capacity(nb * nb);
    for (i, &n) in alg.block_dims().iter().enumerate() {
        for (j, &m) in alg.block_dims().iter().enumerate() {
            if i == j {
                let v = vec_row_major(&state.sqrt_rho()[i]);
                let mut blk = CMat::zeros(n * n, n * n);
                for p in 0..n * n {
                    for q in 0..n * n {
                        blk[(p, q)] = v[p] * v[q].conj();
                    }
                }
                blocks.push(blk);
            } else {
                blocks.push(CMat::zeros(n * m, n * m));
            }
        }
    }
    Coupling::new(alg, alg, blocks).expect("delta coupling is a valid state")
}

/// The channel `E_ω` of a transport plan, from the defining relation
/// `ω(a ⊗ b′) = δ_ν(E_ω(a) ⊗ b′)`.
///
/// Closed form: `E(a) = ρ_ν^{-1/2} (Σ_i ptr_1[Ω_ij (a_i ⊗ 1)])ᵀ ρ_ν^{-1/2}`
/// per target block j; unit tests validate it against the defining relation
/// on a full product basis.
pub fn channel_of_plan(
    plan: &Coupling,
    mu: &FaithfulState,
    nu: &FaithfulState,
) -> Result<SuperOp> {
    let res = plan.marginal_residual(mu, nu);
    if res > TOL_MARGINAL {
        return Err(QotError::MarginalMismatch(res));
    }
    let a_alg = mu.algebra();
    let b_alg = nu.algebra();
    let e = SuperOp::from_action(a_alg, b_alg, |a| {
        let blocks: Vec<CMat> = b_alg
            .block_dims()
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                let mut k = CMat::zeros(m, m);
                for (i, &n) in a_alg.block_dims().iter().enumerate() {
                    let lifted = plan.block(i, j) * kron(a.block(i), &CMat::identity(m, m));
                    k += partial_trace_first(&lifted, n, m);
                }
                let inv = &nu.inv_sqrt_rho()[j];
                inv * k.transpose() * inv
            })
            .collect();
        AlgElement::new(b_alg, blocks).expect("shapes match")
    });
    // flags reflect what the plan guarantees: unitality from the second
    // marginal, complete positivity from PSD of the plan
    Ok(e.with_inferred_flags())
}

/// The unique coupling of a unital completely positive state-preserving
/// channel, inverse to [`channel_of_plan`].
pub fn plan_of_channel(e: &SuperOp, mu: &FaithfulState, nu: &FaithfulState) -> Result<Coupling> {
    let choi_min = e.min_choi_eig();
    if choi_min < -TOL_PSD {
        return Err(QotError::NotCp(choi_min));
    }
    let r = e.unital_residual();
    if r > 1e-8 {
        return Err(QotError::NotUnital(r));
    }
    let inv = e.invariance_residual(mu, nu);
    if inv > 1e-8 {
        return Err(QotError::InvarianceViolated(inv));
    }
    let a_alg = mu.algebra();
    let b_alg = nu.algebra();
    let nbb = b_alg.n_blocks();
    let mut blocks = Vec::with_capacity(a_alg.n_blocks() * nbb);
    for (i, &n) in a_alg.block_dims().iter().enumerate() {
        // images of the matrix units of block i under F = (ρ^ηΕρ^η)ᵀ
        let mut images: Vec<Vec<CMat>> = Vec::with_capacity(n * n);
        for p in 0..n {
            for q in 0..n {
                let mut unit = a_alg.zero();
                unit.blocks_mut()[i][(p, q)] = cr(1.0);
                let eu = e.apply(&unit);
                let f: Vec<CMat> = (0..nbb)
                    .map(|j| {
                        let s = &nu.sqrt_rho()[j];
                        (s * eu.block(j) * s).transpose()
                    })
                    .collect();
                images.push(f);
            }
        }
        for (j, &m) in b_alg.block_dims().iter().enumerate() {
            // Ω_ij[(q,k),(p,l)] = F(E_pq)[k,l]
            let mut blk = CMat::zeros(n * m, n * m);
            for p in 0..n {
                for q in 0..n {
                    let f = &images[p * n + q][j];
                    for k in 0..m {
                        for l in 0..m {
                            blk[(q * m + k, p * m + l)] = f[(k, l)];
                        }
                    }
                }
            }
            blocks.push(hermitize(&blk));
        }
    }
    let plan = Coupling::new_unchecked(a_alg, b_alg, blocks)?;
    plan.validate().map_err(|_| {
        QotError::NotCp(
            plan.blocks
                .iter()
                .map(|b| hermitian_eigen(&hermitize(b)).0[0])
                .fold(f64::INFINITY, f64::min),
        )
    })?;
    Ok(plan)
}

#[derive(Serialize, Deserialize)]
struct CouplingRep {
    a_blocks: Vec<usize>,
    b_blocks: Vec<usize>,
    omega: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<Coupling> for CouplingRep {
    fn from(c: Coupling) -> Self {
        CouplingRep {
            a_blocks: c.a_dims.clone(),
            b_blocks: c.b_dims.clone(),
            omega: c.blocks.iter().map(mat_rep).collect(),
        }
    }
}

impl TryFrom<CouplingRep> for Coupling {
    type Error = QotError;
    fn try_from(rep: CouplingRep) -> Result<Self> {
        let a = BlockAlgebra::new(rep.a_blocks)?;
        let b = BlockAlgebra::new(rep.b_blocks)?;
        let blocks = rep.omega.iter().map(|m| mat_from_rep(m)).collect::<Result<_>>()?;
        Coupling::new(&a, &b, blocks)
    }
}
