//! Minimization of the transport cost over the feasible coupling sets, and
//! the structure extracted from (near-)optimal plans.
//!
//! Two independent routes compute every distance: the splitting solver
//! (ADMM over the PSD cone and the affine rows) is the default; a dense
//! simplex handles abelian pairs exactly; vertex enumeration and a
//! conditional-gradient method serve as cross-check oracles in tests.

pub mod cg;
pub mod polish;
pub mod simplex;
pub mod splitting;
pub mod vertex;

#[cfg(test)]
mod tests;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{QotError, Result};
use crate::finalg::{channel_of_plan, kms_dual_raw, Coupling};
use crate::transport::{build_constraints, ConstraintClass, ConstraintSet, CostFunctional};
use crate::systems::SystemVN;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Feasibility tolerance for declaring convergence.
    pub tol_feas: f64,
    /// Gap-estimate tolerance for declaring convergence.
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Recorded in reports; the solvers themselves are deterministic.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol_feas: 1e-8, tol_gap: 1e-6, max_iter: 20_000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
}

/// Result of one distance computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    /// `W = sqrt(max(cost, 0))`.
    pub w: f64,
    pub cost: f64,
    pub class: ConstraintClass,
    pub plan: Coupling,
    /// Max-norm residual per constraint tag at the returned plan.
    pub residuals: BTreeMap<String, f64>,
    /// Optimality-gap estimate (0 when the optimum was certified exactly).
    pub gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0_f64, |a, &b| a.max(b))
    }
}

struct Assembled {
    constraints: ConstraintSet,
    cost: CostFunctional,
    affine: crate::rows::AffineRows,
    c: DVector<f64>,
    start: DVector<f64>,
}

const ROW_COMPRESSION_TOL: f64 = 1e-11;
/// Below this raw optimum the solver attempts an exact zero certificate.
const ZERO_CERT_THRESHOLD: f64 = 1e-4;

fn assemble(a: &SystemVN, b: &SystemVN, class: ConstraintClass) -> Result<Assembled> {
    let constraints = build_constraints(a, b, class)?;
    let cost = CostFunctional::build(a, b)?;
    let affine = constraints.compressed(ROW_COMPRESSION_TOL)?;
    let c = cost.coeff_vector();
    let start = constraints
        .layout()
        .pack(Coupling::product(a.state(), b.state()).blocks());
    // the product plan is always feasible; anything else is an assembly bug
    if affine.residual(&start) > 1e-8 {
        return Err(QotError::SolverFailure(format!(
            "product plan violates the assembled rows by {:.3e}",
            affine.residual(&start)
        )));
    }
    Ok(Assembled { constraints, cost, affine, c, start })
}

fn report_from_coords(
    asm: &Assembled,
    a: &SystemVN,
    b: &SystemVN,
    class: ConstraintClass,
    x: &DVector<f64>,
    gap: f64,
    iterations: usize,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let layout = asm.constraints.layout();
    let plan = Coupling::new(a.algebra(), b.algebra(), layout.unpack(x))?;
    let cost = asm.cost.constant() + asm.c.dot(x);
    if cost < -1e-9 {
        return Err(QotError::SolverFailure(format!(
            "optimal cost {cost:.3e} is negative beyond tolerance"
        )));
    }
    let cost = cost.max(0.0);
    let residuals = asm.constraints.residual_by_tag(&plan);
    let max_res = residuals.values().fold(0.0_f64, |acc, &v| acc.max(v));
    let status = if max_res <= opts.tol_feas && gap <= opts.tol_gap {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIterations
    };
    Ok(SolveReport {
        w: cost.sqrt(),
        cost,
        class,
        plan,
        residuals,
        gap,
        iterations,
        status,
    })
}

/// Wasserstein distance through the splitting solver (any pair of systems).
pub fn wasserstein(
    a: &SystemVN,
    b: &SystemVN,
    class: ConstraintClass,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let asm = assemble(a, b, class)?;
    let layout = asm.constraints.layout();
    let params = splitting::AdmmParams {
        max_iter: opts.max_iter,
        tol: 1e-11,
        over_relax: 1.6,
    };
    let admm = splitting::solve(layout, &asm.affine, &asm.c, &asm.start, &params);
    let mut x = polish::face_polish(layout, &asm.affine, &asm.c, &admm.z);
    x = polish::final_cleanup(layout, &asm.affine, &x);
    let mut gap = admm
        .objective_split
        .max((asm.c.dot(&admm.z) - asm.c.dot(&x)).abs());

    let cost_now = asm.cost.constant() + asm.c.dot(&x);
    if cost_now < ZERO_CERT_THRESHOLD {
        if let Some(certified) = polish::certify_cost(
            layout,
            asm.constraints.rows(),
            asm.constraints.rhs(),
            &asm.c,
            asm.cost.constant(),
            0.0,
            &x,
            20_000,
        ) {
            x = certified;
            gap = 0.0;
        }
    }
    report_from_coords(&asm, a, b, class, &x, gap, admm.iterations, opts)
}

/// Dedicated exact LP route for abelian pairs; same contract as
/// [`wasserstein`].
pub fn classical_lp(
    a: &SystemVN,
    b: &SystemVN,
    class: ConstraintClass,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    if !a.algebra().abelian() || !b.algebra().abelian() {
        return Err(QotError::NotAbelian);
    }
    let asm = assemble(a, b, class)?;
    let lp = simplex::solve(asm.affine.basis(), asm.affine.rhs(), &asm.c)?;
    report_from_coords(&asm, a, b, class, &lp.x, 0.0, lp.iterations, opts)
}

/// Independent optimum for tests: vertex enumeration on small abelian
/// pairs, conditional gradient plus polish on small quantum pairs. Returns
/// the distance value `W`.
pub fn brute_oracle(a: &SystemVN, b: &SystemVN, class: ConstraintClass) -> Result<f64> {
    let asm = assemble(a, b, class)?;
    let layout = asm.constraints.layout();
    if a.algebra().abelian() && b.algebra().abelian() {
        let mn = a.algebra().n_blocks() * b.algebra().n_blocks();
        if mn > 12 {
            return Err(QotError::TooLarge(format!("{mn} classical coupling entries")));
        }
        let (value, _x) = vertex::enumerate_optimum(asm.affine.basis(), asm.affine.rhs(), &asm.c)?;
        let cost = (asm.cost.constant() + value).max(0.0);
        Ok(cost.sqrt())
    } else {
        let dim = layout.hilbert_dim();
        if dim > 16 {
            return Err(QotError::TooLarge(format!("coupling dimension {dim}")));
        }
        let raw = cg::solve(layout, &asm.affine, &asm.c, &asm.start, 30_000);
        let mut x = polish::face_polish(layout, &asm.affine, &asm.c, &raw);
        x = polish::final_cleanup(layout, &asm.affine, &x);
        let cost_now = asm.cost.constant() + asm.c.dot(&x);
        if cost_now < ZERO_CERT_THRESHOLD {
            if let Some(certified) = polish::certify_cost(
                layout,
                asm.constraints.rows(),
                asm.constraints.rhs(),
                &asm.c,
                asm.cost.constant(),
                0.0,
                &x,
                20_000,
            ) {
                x = certified;
            }
        }
        let cost = (asm.cost.constant() + asm.c.dot(&x)).max(0.0);
        Ok(cost.sqrt())
    }
}

/// Residuals of the zero-distance structure theorems at an optimal plan:
/// multiplicativity of `E_ω` on the coordinate algebra, coordinate matching
/// `E_ω(k_i) = l_i`, dynamics intertwining, and invertibility through the
/// KMS dual channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsoReport {
    pub homomorphism_residual: f64,
    pub coordinate_match_residual: f64,
    pub intertwining_residual: f64,
    pub invertibility_residual: f64,
}

pub fn extract_isomorphism(
    report: &SolveReport,
    a: &SystemVN,
    b: &SystemVN,
) -> Result<IsoReport> {
    if report.status != SolveStatus::Converged {
        return Err(QotError::NotConverged("isomorphism extraction needs a converged solve".into()));
    }
    let e = channel_of_plan(&report.plan, a.state(), b.state())?;
    let images: Vec<_> = a.coords().iter().map(|k| e.apply(k)).collect();

    let mut hom: f64 = 0.0;
    for (i, ki) in a.coords().iter().enumerate() {
        for (j, kj) in a.coords().iter().enumerate() {
            let lhs = e.apply(&ki.mul(kj));
            let rhs = images[i].mul(&images[j]);
            hom = hom.max(lhs.sub(&rhs).frob_norm());
        }
    }

    let mut coord: f64 = 0.0;
    for (img, l) in images.iter().zip(b.coords()) {
        coord = coord.max(img.sub(l).frob_norm());
    }

    let mut intertwine: f64 = 0.0;
    for ((_, alpha), (_, beta)) in a.dynamics().iter().zip(b.dynamics()) {
        for k in a.coords() {
            let lhs = e.apply(&alpha.apply(k));
            let rhs = beta.apply(&e.apply(k));
            intertwine = intertwine.max(lhs.sub(&rhs).frob_norm());
        }
    }

    // ι_{B^σ,A^σ} ∘ ι_{A,B} = id on words in the coordinates
    let e_sigma = kms_dual_raw(&e, a.state(), b.state());
    let mut invert: f64 = 0.0;
    let mut sample: Vec<crate::finalg::AlgElement> = a.coords().to_vec();
    for (i, ki) in a.coords().iter().enumerate() {
        for kj in a.coords().iter().skip(i) {
            sample.push(ki.mul(kj));
        }
    }
    for w in &sample {
        let round = e_sigma.apply(&e.apply(w));
        invert = invert.max(round.sub(w).frob_norm());
    }

    Ok(IsoReport {
        homomorphism_residual: hom,
        coordinate_match_residual: coord,
        intertwining_residual: intertwine,
        invertibility_residual: invert,
    })
}

/// The two deviation bounds `W(A, A^←) ≤ 2 W(A, B)` (forward and mirrored)
/// for a reversible pair with `B` in standard quantum detailed balance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub class: ConstraintClass,
    pub w_a_to_reverse: f64,
    pub w_a_to_b: f64,
    pub forward_holds: bool,
    pub w_reverse_to_a: f64,
    pub w_b_to_a: f64,
    pub mirrored_holds: bool,
}

const BOUND_SLACK: f64 = 1e-6;

pub fn sqdb_bound_check(
    a: &SystemVN,
    b: &SystemVN,
    class: ConstraintClass,
    opts: &SolverOptions,
) -> Result<BoundReport> {
    if matches!(class, ConstraintClass::Plain) {
        return Err(QotError::WrongShape(
            "the deviation bound is stated for the modular and kms classes".into(),
        ));
    }
    if !a.is_reversible() {
        return Err(QotError::NoReversingOperation);
    }
    let sqdb = b.check_theta_sqdb()?;
    if !sqdb.balanced {
        return Err(QotError::SqdbViolated(sqdb.residual));
    }
    let a_rev = a.reverse_system()?;
    let w_a_to_reverse = wasserstein(a, &a_rev, class, opts)?.w;
    let w_a_to_b = wasserstein(a, b, class, opts)?.w;
    let w_reverse_to_a = wasserstein(&a_rev, a, class, opts)?.w;
    let w_b_to_a = wasserstein(b, a, class, opts)?.w;
    Ok(BoundReport {
        class,
        w_a_to_reverse,
        w_a_to_b,
        forward_holds: w_a_to_reverse <= 2.0 * w_a_to_b + BOUND_SLACK,
        w_reverse_to_a,
        w_b_to_a,
        mirrored_holds: w_reverse_to_a <= 2.0 * w_b_to_a + BOUND_SLACK,
    })
}

/// Deviation functional and bound for the 4-point/2-point classical family:
/// `f ≤ 4(1 + |r̃ − s|) W(A,B)²`, and `f ≤ 4 W(A,B)²` when `r + s = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationReport {
    pub f: f64,
    pub w: f64,
    pub bound: f64,
    pub holds: bool,
    /// The simplified bound `4W²`, present when `r + s = 1`.
    pub simple_bound: Option<f64>,
    pub simple_holds: Option<bool>,
}

pub fn example_4x2_deviation(
    a: &SystemVN,
    b: &SystemVN,
    opts: &SolverOptions,
) -> Result<DeviationReport> {
    if !a.algebra().abelian() || a.algebra().n_blocks() != 4 {
        return Err(QotError::WrongShape("A must be a 4-point classical chain".into()));
    }
    if !b.algebra().abelian() || b.algebra().n_blocks() != 2 {
        return Err(QotError::WrongShape("B must be a 2-point classical chain".into()));
    }
    let expected_k = [0.5, -0.5, 0.5, -0.5];
    let expected_l = [0.5, -0.5];
    let coord_ok = a.coord_count() == 1
        && b.coord_count() == 1
        && a.coords()[0]
            .classical_values()
            .iter()
            .zip(expected_k)
            .all(|(v, e)| (v.re - e).abs() < 1e-12 && v.im.abs() < 1e-12)
        && b.coords()[0]
            .classical_values()
            .iter()
            .zip(expected_l)
            .all(|(v, e)| (v.re - e).abs() < 1e-12 && v.im.abs() < 1e-12);
    if !coord_ok {
        return Err(QotError::WrongShape(
            "the deviation bound needs the first-spin coordinate on A and the spin coordinate on B"
                .into(),
        ));
    }
    let mu = a.state().probs();
    let alpha = a.dynamics()[0].1.matrix();
    let beta = b.dynamics()[0].1.matrix();
    let r = beta[(0, 1)].re;
    let s = beta[(1, 0)].re;
    let al = |p: usize, q: usize| alpha[(p, q)].re;
    let f = (mu[0] * al(0, 1) + mu[2] * al(2, 1) - mu[1] * s).abs()
        + (mu[0] * al(0, 3) + mu[2] * al(2, 3) - mu[3] * s).abs()
        + (mu[1] * al(1, 0) + mu[3] * al(3, 0) - mu[0] * r).abs()
        + (mu[1] * al(1, 2) + mu[3] * al(3, 2) - mu[2] * r).abs();
    let w = classical_lp(a, b, ConstraintClass::Plain, opts)?.w;
    let bound = 4.0 * (1.0 + ((1.0 - r) - s).abs()) * w * w + BOUND_SLACK;
    let (simple_bound, simple_holds) = if (r + s - 1.0).abs() < 1e-12 {
        let sb = 4.0 * w * w + BOUND_SLACK;
        (Some(sb), Some(f <= sb))
    } else {
        (None, None)
    };
    Ok(DeviationReport { f, w, bound, holds: f <= bound, simple_bound, simple_holds })
}

/// Row matrix of the compressed system (for oracles and diagnostics).
pub fn compressed_rows(set: &ConstraintSet) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let aff = set.compressed(ROW_COMPRESSION_TOL)?;
    Ok((aff.basis().clone(), aff.rhs().clone()))
}
