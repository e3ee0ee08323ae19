//! Transport plan constraint systems, cost functionals and feasibility.
//!
//! A plan between systems `A` and `B` is a coupling of their states whose
//! channel intertwines the dynamics, `E_ω ∘ α = β ∘ E_ω`. The constraint
//! assembly expresses this as affine rows over the real coupling
//! coordinates, over a full Hermitian product basis; the classes add
//! modular-generator rows and KMS-dual rows on top of the marginal and
//! balance rows.

pub mod classical;

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::basis;
use crate::error::{QotError, Result};
use crate::finalg::{
    channel_of_plan, dual_map_raw, kms_dual_raw, AlgElement, Coupling, FaithfulState, SuperOp,
};
use crate::layout::PairLayout;
use crate::linalg::{hermitian_eigen, hermitize, kron, CMat, IM};
use crate::rows::AffineRows;
use crate::systems::SystemVN;

/// Which set of transport plans a constraint system describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintClass {
    /// Marginals and dynamics balance only.
    Plain,
    /// Plus modular-generator intertwining.
    Modular,
    /// Plus KMS-dual balance (includes the modular rows).
    Kms,
}

impl ConstraintClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintClass::Plain => "plain",
            ConstraintClass::Modular => "modular",
            ConstraintClass::Kms => "kms",
        }
    }
}

/// Affine rows over real coupling coordinates with per-row provenance tags.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    layout: PairLayout,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    tags: Vec<String>,
}

impl ConstraintSet {
    pub fn layout(&self) -> &PairLayout {
        &self.layout
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    /// Max-norm residual per tag at a coupling.
    pub fn residual_by_tag(&self, plan: &Coupling) -> BTreeMap<String, f64> {
        let x = self.layout.pack(plan.blocks());
        self.residual_by_tag_at(&x)
    }

    pub fn residual_by_tag_at(&self, x: &DVector<f64>) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for ((row, &b), tag) in self.rows.iter().zip(&self.rhs).zip(&self.tags) {
            let v: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            let r = (v - b).abs();
            let e = out.entry(tag.clone()).or_insert(0.0);
            *e = e.max(r);
        }
        out
    }

    pub fn max_residual(&self, plan: &Coupling) -> f64 {
        self.residual_by_tag(plan).values().fold(0.0_f64, |a, &b| a.max(b))
    }

    /// Rank-compressed orthonormal row system for the solvers.
    pub fn compressed(&self, tol: f64) -> Result<AffineRows> {
        AffineRows::from_raw(&self.rows, &self.rhs, self.layout.total(), tol)
    }
}

/// Row coefficients of the functional `Ω ↦ Re tr(Ω M)` for a blockwise
/// operator `M` given per pair block.
fn row_of_pair_blocks(layout: &PairLayout, blocks: &[CMat]) -> Vec<f64> {
    let mut row = vec![0.0; layout.total()];
    for (t, m) in blocks.iter().enumerate() {
        let herm = hermitize(m);
        for (k, &c) in basis::hermitian_coords(&herm).iter().enumerate() {
            row[layout.offset(t) + k] = c;
        }
    }
    row
}

fn balance_row_blocks(
    layout: &PairLayout,
    left: &AlgElement,
    y: &AlgElement,
    x: &AlgElement,
    right: &AlgElement,
) -> Vec<f64> {
    // blocks of left⊗y − x⊗right
    let na = layout.a_dims().len();
    let nb = layout.b_dims().len();
    let mut blocks = Vec::with_capacity(na * nb);
    for i in 0..na {
        for j in 0..nb {
            blocks.push(kron(left.block(i), y.block(j)) - kron(x.block(i), right.block(j)));
        }
    }
    row_of_pair_blocks(layout, &blocks)
}

/// Generator of the modular flow of the commutant state in commutant
/// coordinates, `c ↦ i[(log ρ)ᵀ, c]`.
fn dual_modular_generator(state: &FaithfulState) -> SuperOp {
    let alg = state.algebra().clone();
    let logs: Vec<CMat> = state.log_rho().iter().map(|h| h.transpose()).collect();
    SuperOp::from_action(state.algebra(), state.algebra(), move |c| {
        let blocks = logs
            .iter()
            .zip(c.blocks())
            .map(|(h, b)| (h * b - b * h) * IM)
            .collect();
        AlgElement::new(&alg, blocks).expect("shapes match")
    })
}

/// Dynamics pairs used in the balance rows: entries are matched by name and
/// the reversing operations are appended as a distinguished pair when both
/// systems carry one.
fn paired_dynamics<'a>(
    a: &'a SystemVN,
    b: &'a SystemVN,
) -> Result<Vec<(String, &'a SuperOp, &'a SuperOp)>> {
    if a.dynamics().len() != b.dynamics().len() {
        return Err(QotError::DimensionMismatch(format!(
            "systems carry {} vs {} dynamics entries",
            a.dynamics().len(),
            b.dynamics().len()
        )));
    }
    let mut out = Vec::with_capacity(a.dynamics().len() + 1);
    for ((na, ma), (nb, mb)) in a.dynamics().iter().zip(b.dynamics()) {
        if na != nb {
            return Err(QotError::DimensionMismatch(format!(
                "dynamics names do not pair: '{na}' vs '{nb}'"
            )));
        }
        out.push((na.clone(), ma, mb));
    }
    if let (Some(ta), Some(tb)) = (a.reversing(), b.reversing()) {
        out.push(("theta".into(), ta, tb));
    }
    Ok(out)
}

/// Assemble the affine constraint system of the transport class.
pub fn build_constraints(
    a: &SystemVN,
    b: &SystemVN,
    class: ConstraintClass,
) -> Result<ConstraintSet> {
    let layout = PairLayout::new(a.algebra().block_dims(), b.algebra().block_dims());
    let pairs = paired_dynamics(a, b)?;
    let basis_a = a.algebra().hermitian_element_basis();
    let basis_b = b.algebra().hermitian_element_basis();
    let unit_a = a.algebra().unit();
    let unit_b = b.algebra().unit();

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut tags = Vec::new();

    // marginals: ω(x⊗1) = μ(x) and ω(1⊗π'(y)) = tr(ρ_ν yᵀ)
    for x in &basis_a {
        rows.push(balance_row_blocks(&layout, x, &unit_b, &a.algebra().zero(), &unit_b));
        rhs.push(a.state().expect(x).re);
        tags.push("marginal-A".into());
    }
    for y in &basis_b {
        let blocks: Vec<CMat> = {
            let mut v = Vec::new();
            for i in 0..layout.a_dims().len() {
                for j in 0..layout.b_dims().len() {
                    v.push(kron(unit_a.block(i), y.block(j)));
                }
            }
            v
        };
        rows.push(row_of_pair_blocks(&layout, &blocks));
        rhs.push(b.state().expect(&y.transpose()).re);
        tags.push("marginal-B".into());
    }

    // balance rows per dynamics pair over the full product basis
    for (name, alpha, beta) in &pairs {
        let beta_dual = dual_map_raw(beta, b.state(), b.state());
        for x in &basis_a {
            let ax = alpha.apply(x);
            for y in &basis_b {
                let by = beta_dual.apply(y);
                rows.push(balance_row_blocks(&layout, &ax, y, x, &by));
                rhs.push(0.0);
                tags.push(format!("balance:{name}"));
            }
        }
    }

    if matches!(class, ConstraintClass::Modular | ConstraintClass::Kms) {
        // modular-generator intertwining replaces the one-parameter family
        let da = a.state().modular_generator();
        let db_dual = dual_modular_generator(b.state());
        for x in &basis_a {
            let dx = da.apply(x);
            for y in &basis_b {
                let dy = db_dual.apply(y);
                rows.push(balance_row_blocks(&layout, &dx, y, x, &dy));
                rhs.push(0.0);
                tags.push("modular".into());
            }
        }
    }

    if matches!(class, ConstraintClass::Kms) {
        for (name, alpha, beta) in &pairs {
            let alpha_sigma = kms_dual_raw(alpha, a.state(), a.state());
            let beta_sigma_dual =
                dual_map_raw(&kms_dual_raw(beta, b.state(), b.state()), b.state(), b.state());
            for x in &basis_a {
                let ax = alpha_sigma.apply(x);
                for y in &basis_b {
                    let by = beta_sigma_dual.apply(y);
                    rows.push(balance_row_blocks(&layout, &ax, y, x, &by));
                    rhs.push(0.0);
                    tags.push(format!("kms:{name}"));
                }
            }
        }
    }

    Ok(ConstraintSet { layout, rows, rhs, tags })
}

/// The quadratic coordinate cost as an affine functional of the coupling:
/// `I(Ω) = constant − Σ_ij tr(Ω_ij G_ij)`.
#[derive(Debug, Clone)]
pub struct CostFunctional {
    layout: PairLayout,
    constant: f64,
    gram_blocks: Vec<CMat>,
}

impl CostFunctional {
    pub fn build(a: &SystemVN, b: &SystemVN) -> Result<CostFunctional> {
        if a.coord_count() != b.coord_count() {
            return Err(QotError::DimensionMismatch(format!(
                "coordinate counts differ: {} vs {}",
                a.coord_count(),
                b.coord_count()
            )));
        }
        let layout = PairLayout::new(a.algebra().block_dims(), b.algebra().block_dims());
        let mut constant = 0.0;
        for (k, l) in a.coords().iter().zip(b.coords()) {
            constant += a.state().expect(&k.adjoint().mul(k)).re;
            constant += b.state().expect(&l.adjoint().mul(l)).re;
        }
        // m_l = (ρ_ν^{-1/2} l ρ_ν^{1/2})ᵀ represents S_ν l* S_ν in commutant
        // coordinates; G = Σ_l [k_l† ⊗ m_l + k_l ⊗ m_l†]
        let nbb = b.algebra().n_blocks();
        let mut gram_blocks: Vec<CMat> = layout
            .pair_dims()
            .iter()
            .map(|&d| CMat::zeros(d, d))
            .collect();
        for (k, l) in a.coords().iter().zip(b.coords()) {
            let m_blocks: Vec<CMat> = b
                .state()
                .inv_sqrt_rho()
                .iter()
                .zip(b.state().sqrt_rho())
                .zip(l.blocks())
                .map(|((inv, sq), lb)| (inv * lb * sq).transpose())
                .collect();
            for (i, kb) in k.blocks().iter().enumerate() {
                for (j, mb) in m_blocks.iter().enumerate() {
                    let cross = kron(&kb.adjoint(), mb);
                    gram_blocks[i * nbb + j] += &cross + cross.adjoint();
                }
            }
        }
        Ok(CostFunctional { layout, constant, gram_blocks })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn layout(&self) -> &PairLayout {
        &self.layout
    }

    /// Cost evaluated as the affine functional of the coupling.
    pub fn value(&self, plan: &Coupling) -> f64 {
        let mut v = self.constant;
        for (g, blk) in self.gram_blocks.iter().zip(plan.blocks()) {
            v -= (g * blk).trace().re;
        }
        v
    }

    /// Real coefficient vector `c` with `I = constant + c · x` in packed
    /// coupling coordinates.
    pub fn coeff_vector(&self) -> DVector<f64> {
        -self.layout.pack(&self.gram_blocks)
    }
}

/// Transport cost through the channel of the plan (the defining form):
/// `Σ_i [μ(k_i*k_i) + ν(l_i*l_i) − 2 Re ν(l_i* E_ω(k_i))]`.
pub fn cost(plan: &Coupling, a: &SystemVN, b: &SystemVN) -> Result<f64> {
    let (part1, part2) = cost_parts(plan, a, b)?;
    Ok(part1 + part2)
}

/// The two Kadison parts of the cost: coordinate mismatch
/// `Σ ν(|l − E(k)|²)` and channel dissipation `Σ [μ(|k|²) − ν(|E(k)|²)]`.
/// Both are individually nonnegative for completely positive plans.
pub fn cost_parts(plan: &Coupling, a: &SystemVN, b: &SystemVN) -> Result<(f64, f64)> {
    if a.coord_count() != b.coord_count() {
        return Err(QotError::DimensionMismatch(format!(
            "coordinate counts differ: {} vs {}",
            a.coord_count(),
            b.coord_count()
        )));
    }
    let e = channel_of_plan(plan, a.state(), b.state())?;
    let mut mismatch = 0.0;
    let mut dissipation = 0.0;
    for (k, l) in a.coords().iter().zip(b.coords()) {
        let ek = e.apply(k);
        let diff = l.sub(&ek);
        mismatch += b.state().expect(&diff.adjoint().mul(&diff)).re;
        dissipation += a.state().expect(&k.adjoint().mul(k)).re
            - b.state().expect(&ek.adjoint().mul(&ek)).re;
    }
    Ok((mismatch, dissipation))
}

/// Max-norm residual per constraint tag; the plan is feasible for the class
/// when every entry is at most `1e-8`.
pub fn feasibility_residual(
    plan: &Coupling,
    a: &SystemVN,
    b: &SystemVN,
    class: ConstraintClass,
) -> Result<BTreeMap<String, f64>> {
    Ok(build_constraints(a, b, class)?.residual_by_tag(plan))
}

pub const TOL_FEASIBLE: f64 = 1e-8;

/// Probability-flow deviation `V_XY = tr(α*(X) Y) − tr(X Y)` for density
/// matrices `X`, `Y` and the state-picture action `α*`.
pub fn flow_deviation_v(
    alpha_state_action: &SuperOp,
    x: &AlgElement,
    y: &AlgElement,
) -> Result<f64> {
    for (name, e) in [("X", x), ("Y", y)] {
        if e.hermitian_residual() > 1e-10 {
            return Err(QotError::NotDensity(format!("{name} is not Hermitian")));
        }
        if (e.trace().re - 1.0).abs() > 1e-10 || e.trace().im.abs() > 1e-10 {
            return Err(QotError::NotDensity(format!("{name} has trace != 1")));
        }
        let min = e
            .blocks()
            .iter()
            .map(|b| hermitian_eigen(&hermitize(b)).0[0])
            .fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(QotError::NotDensity(format!("{name} has eigenvalue {min:.3e}")));
        }
    }
    let moved = alpha_state_action.apply(x);
    Ok((moved.mul(y).trace() - x.mul(y).trace()).re)
}

#[cfg(test)]
mod tests;
