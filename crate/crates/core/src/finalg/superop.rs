use serde::{Deserialize, Serialize};

use super::element::{mat_from_rep, mat_rep};
use super::{AlgElement, BlockAlgebra};
use crate::basis;
use crate::error::{QotError, Result};
use crate::linalg::{cr, expm, hermitian_eigen, kron, max_abs, CMat, CVec, C64};

/// Verification tolerance for superoperator flags.
const TOL_FLAG: f64 = 1e-10;

/// Structural flags of a superoperator, each verified at construction time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperOpFlags {
    pub unital: bool,
    pub positive: bool,
    pub cp: bool,
    pub anti: bool,
}

/// A linear map between the element spaces of two block algebras, stored as
/// a complex matrix in the fixed element basis of source and target.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SuperOpRep", into = "SuperOpRep")]
pub struct SuperOp {
    source: BlockAlgebra,
    target: BlockAlgebra,
    matrix: CMat,
    flags: SuperOpFlags,
}

impl SuperOp {
    /// Build a map from its action on elements; flags start cleared.
    pub fn from_action(
        source: &BlockAlgebra,
        target: &BlockAlgebra,
        f: impl Fn(&AlgElement) -> AlgElement,
    ) -> Self {
        let mut matrix = CMat::zeros(target.element_dim(), source.element_dim());
        for (col, b) in source.element_basis().iter().enumerate() {
            let out = f(b);
            debug_assert!(out.matches(target));
            matrix.set_column(col, &out.coords());
        }
        Self { source: source.clone(), target: target.clone(), matrix, flags: SuperOpFlags::default() }
    }

    pub fn from_matrix(source: BlockAlgebra, target: BlockAlgebra, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != target.element_dim() || matrix.ncols() != source.element_dim() {
            return Err(QotError::ShapeMismatch(format!(
                "superop matrix must be {}x{}, got {}x{}",
                target.element_dim(),
                source.element_dim(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { source, target, matrix, flags: SuperOpFlags::default() })
    }

    pub fn identity(alg: &BlockAlgebra) -> Self {
        let n = alg.element_dim();
        Self {
            source: alg.clone(),
            target: alg.clone(),
            matrix: CMat::identity(n, n),
            flags: SuperOpFlags { unital: true, positive: true, cp: true, anti: false },
        }
    }

    /// A classical transition matrix acting on functions, `a ↦ T a`.
    ///
    /// Row-stochastic `T` gives the dynamics of a Markov chain in the
    /// Heisenberg picture used throughout.
    pub fn classical_transition(alg: &BlockAlgebra, t: &nalgebra::DMatrix<f64>) -> Result<Self> {
        if !alg.abelian() || t.nrows() != alg.n_blocks() || t.ncols() != alg.n_blocks() {
            return Err(QotError::ShapeMismatch(format!(
                "transition matrix must be {0}x{0} on an abelian algebra",
                alg.n_blocks()
            )));
        }
        let matrix = t.map(cr);
        Self::from_matrix(alg.clone(), alg.clone(), matrix)
    }

    /// The blockwise transpose map `a ↦ aᵀ` (the standard reversing
    /// operation); diagonal in the element basis.
    pub fn transpose_map(alg: &BlockAlgebra) -> Self {
        let mut signs = Vec::with_capacity(alg.element_dim());
        for &n in alg.block_dims() {
            signs.extend(basis::element_basis_transpose_signs(n));
        }
        let matrix = CMat::from_diagonal(&CVec::from_iterator(signs.len(), signs.iter().map(|&s| cr(s))));
        Self {
            source: alg.clone(),
            target: alg.clone(),
            matrix,
            flags: SuperOpFlags { unital: true, positive: true, cp: alg.abelian(), anti: true },
        }
    }

    pub fn source(&self) -> &BlockAlgebra {
        &self.source
    }

    pub fn target(&self) -> &BlockAlgebra {
        &self.target
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn flags(&self) -> SuperOpFlags {
        self.flags
    }

    pub fn apply(&self, a: &AlgElement) -> AlgElement {
        debug_assert!(a.matches(&self.source));
        let coords = &self.matrix * a.coords();
        AlgElement::from_coords(&self.target, &coords)
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &SuperOp) -> SuperOp {
        debug_assert_eq!(other.target.block_dims(), self.source.block_dims());
        SuperOp {
            source: other.source.clone(),
            target: self.target.clone(),
            matrix: &self.matrix * &other.matrix,
            flags: SuperOpFlags {
                unital: self.flags.unital && other.flags.unital,
                positive: self.flags.positive && other.flags.positive,
                cp: self.flags.cp && other.flags.cp,
                anti: false,
            },
        }
    }

    /// Convex combination / linear combination of maps with equal shape.
    pub fn linear_combination(maps: &[(f64, &SuperOp)]) -> SuperOp {
        let first = maps[0].1;
        let mut matrix = CMat::zeros(first.matrix.nrows(), first.matrix.ncols());
        for (w, m) in maps {
            matrix += m.matrix.scale(*w);
        }
        SuperOp {
            source: first.source.clone(),
            target: first.target.clone(),
            matrix,
            flags: SuperOpFlags::default(),
        }
    }

    /// The trace-pairing transpose `Eᵗ`, with `tr(Eᵗ(y) x) = tr(y E(x))`.
    ///
    /// In the real element basis this is `N_pq = s_p s_q M_qp` where `s` are
    /// the transposition signs of the basis, so no numerics are involved.
    pub fn trace_transpose(&self) -> SuperOp {
        let mut s_src = Vec::with_capacity(self.source.element_dim());
        for &n in self.source.block_dims() {
            s_src.extend(basis::element_basis_transpose_signs(n));
        }
        let mut s_tgt = Vec::with_capacity(self.target.element_dim());
        for &n in self.target.block_dims() {
            s_tgt.extend(basis::element_basis_transpose_signs(n));
        }
        let mut matrix = CMat::zeros(self.source.element_dim(), self.target.element_dim());
        for p in 0..self.source.element_dim() {
            for q in 0..self.target.element_dim() {
                matrix[(p, q)] = cr(s_src[p] * s_tgt[q]) * self.matrix[(q, p)];
            }
        }
        SuperOp {
            source: self.target.clone(),
            target: self.source.clone(),
            matrix,
            flags: SuperOpFlags::default(),
        }
    }

    /// Matrix exponential `exp(t · self)` as a superoperator.
    pub fn exp_scaled(&self, t: f64) -> SuperOp {
        SuperOp {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: expm(&self.matrix.scale(t)),
            flags: SuperOpFlags::default(),
        }
    }

    /// Choi matrices per (source block, target block) pair; the map is
    /// completely positive iff all of them are PSD.
    pub fn choi_blocks(&self) -> Vec<CMat> {
        let mut out = Vec::new();
        for (i, &n) in self.source.block_dims().iter().enumerate() {
            // images of all matrix units of source block i
            let mut images = Vec::with_capacity(n * n);
            for p in 0..n {
                for q in 0..n {
                    let mut e = self.source.zero();
                    e.blocks_mut()[i][(p, q)] = cr(1.0);
                    images.push(self.apply(&e));
                }
            }
            for (j, &m) in self.target.block_dims().iter().enumerate() {
                let mut choi = CMat::zeros(n * m, n * m);
                for p in 0..n {
                    for q in 0..n {
                        let mut unit = CMat::zeros(n, n);
                        unit[(p, q)] = cr(1.0);
                        choi += kron(&unit, images[p * n + q].block(j));
                    }
                }
                out.push(choi);
            }
        }
        out
    }

    pub fn min_choi_eig(&self) -> f64 {
        self.choi_blocks()
            .iter()
            .map(|c| hermitian_eigen(c).0[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn unital_residual(&self) -> f64 {
        self.apply(&self.source.unit()).max_abs_diff(&self.target.unit())
    }

    /// Max product-reversal residual `‖E(ab) − E(b)E(a)‖` over all pairs of
    /// element-basis vectors.
    pub fn anti_residual(&self) -> f64 {
        let basis = self.source.element_basis();
        let images: Vec<AlgElement> = basis.iter().map(|b| self.apply(b)).collect();
        let mut worst: f64 = 0.0;
        for (ia, a) in basis.iter().enumerate() {
            for (ib, b) in basis.iter().enumerate() {
                let lhs = self.apply(&a.mul(b));
                let rhs = images[ib].mul(&images[ia]);
                worst = worst.max(lhs.max_abs_diff(&rhs));
            }
        }
        worst
    }

    /// Max multiplicativity residual `‖E(ab) − E(a)E(b)‖` over basis pairs.
    pub fn homomorphism_residual(&self) -> f64 {
        let basis = self.source.element_basis();
        let images: Vec<AlgElement> = basis.iter().map(|b| self.apply(b)).collect();
        let mut worst: f64 = 0.0;
        for (ia, a) in basis.iter().enumerate() {
            for (ib, b) in basis.iter().enumerate() {
                let lhs = self.apply(&a.mul(b));
                let rhs = images[ia].mul(&images[ib]);
                worst = worst.max(lhs.max_abs_diff(&rhs));
            }
        }
        worst
    }

    /// Residual of Hermiticity preservation, `max ‖E(h)† − E(h)‖` over the
    /// Hermitian basis.
    pub fn hermiticity_residual(&self) -> f64 {
        self.source
            .hermitian_element_basis()
            .iter()
            .map(|h| self.apply(h).hermitian_residual())
            .fold(0.0, f64::max)
    }

    /// Positivity check: Hermiticity preservation plus PSD preservation on a
    /// fixed pseudo-random sample of PSD inputs. Returns the most negative
    /// output eigenvalue seen (0 or slightly negative is fine).
    pub fn positivity_sample_min_eig(&self) -> f64 {
        let mut state = 0x5eed5eed5eedu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let mut worst = f64::INFINITY;
        for _ in 0..12 {
            let blocks: Vec<CMat> = self
                .source
                .block_dims()
                .iter()
                .map(|&n| {
                    let g = CMat::from_fn(n, n, |_, _| C64::new(next(), next()));
                    &g * g.adjoint()
                })
                .collect();
            let e = AlgElement::new(&self.source, blocks).expect("shapes match");
            let out = self.apply(&e);
            for b in out.blocks() {
                worst = worst.min(hermitian_eigen(b).0[0]);
            }
        }
        worst
    }

    /// Residual of state invariance `ν ∘ E = μ` over the element basis.
    pub fn invariance_residual(
        &self,
        mu: &super::FaithfulState,
        nu: &super::FaithfulState,
    ) -> f64 {
        self.source
            .element_basis()
            .iter()
            .map(|b| (nu.expect(&self.apply(b)) - mu.expect(b)).norm())
            .fold(0.0, f64::max)
    }

    /// Verify the requested flags and attach them; errors name the first
    /// failing flag.
    pub fn with_flags(mut self, flags: SuperOpFlags) -> Result<Self> {
        if flags.unital {
            let r = self.unital_residual();
            if r > TOL_FLAG {
                return Err(QotError::NotUnital(r));
            }
        }
        if flags.cp {
            let e = self.min_choi_eig();
            if e < -TOL_FLAG {
                return Err(QotError::NotCp(e));
            }
        }
        if flags.anti {
            let r = self.anti_residual();
            if r > TOL_FLAG {
                return Err(QotError::NotAntiMultiplicative(r));
            }
        }
        if flags.positive && !flags.cp {
            let h = self.hermiticity_residual();
            if h > TOL_FLAG {
                return Err(QotError::NotPositive(format!(
                    "does not preserve adjoints (residual {h:.3e})"
                )));
            }
            let e = self.positivity_sample_min_eig();
            if e < -TOL_FLAG {
                return Err(QotError::NotPositive(format!(
                    "maps a PSD sample to min eigenvalue {e:.3e}"
                )));
            }
        }
        self.flags = flags;
        Ok(self)
    }

    /// Detect which flags hold and attach them.
    pub fn with_inferred_flags(mut self) -> Self {
        let unital = self.unital_residual() <= TOL_FLAG;
        let cp = self.min_choi_eig() >= -TOL_FLAG;
        let anti = self.anti_residual() <= TOL_FLAG;
        let positive = cp
            || (self.hermiticity_residual() <= TOL_FLAG
                && self.positivity_sample_min_eig() >= -TOL_FLAG);
        self.flags = SuperOpFlags { unital, positive, cp, anti };
        self
    }

    pub fn matrix_max_abs_diff(&self, other: &SuperOp) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn approx_eq(&self, other: &SuperOp, tol: f64) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.matrix_max_abs_diff(other) <= tol
    }
}

#[derive(Serialize, Deserialize)]
struct SuperOpRep {
    source: Vec<usize>,
    target: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
    flags: SuperOpFlags,
}

impl From<SuperOp> for SuperOpRep {
    fn from(e: SuperOp) -> Self {
        SuperOpRep {
            source: e.source.block_dims().to_vec(),
            target: e.target.block_dims().to_vec(),
            matrix: mat_rep(&e.matrix),
            flags: e.flags,
        }
    }
}

impl TryFrom<SuperOpRep> for SuperOp {
    type Error = QotError;
    fn try_from(rep: SuperOpRep) -> Result<Self> {
        let source = BlockAlgebra::new(rep.source)?;
        let target = BlockAlgebra::new(rep.target)?;
        let matrix = mat_from_rep(&rep.matrix)?;
        SuperOp::from_matrix(source, target, matrix)?.with_flags(rep.flags)
    }
}
