//! Scalar specialization for abelian pairs.
//!
//! Orders coupling entries the way the worked classical examples list them:
//! `(ω_11, …, ω_m1, …, ω_1n, …, ω_mn)`, the A-point index running fastest
//! inside each B-point group.

use crate::error::{QotError, Result};
use crate::finalg::Coupling;
use crate::systems::SystemVN;

fn require_abelian(a: &SystemVN, b: &SystemVN) -> Result<()> {
    if !a.algebra().abelian() || !b.algebra().abelian() {
        return Err(QotError::NotAbelian);
    }
    Ok(())
}

/// The classical cost vector `c[(r,p)] = Σ_l |k_l(p) − l_l(r)|²` in the
/// documented ordering.
pub fn cost_vector(a: &SystemVN, b: &SystemVN) -> Result<Vec<f64>> {
    require_abelian(a, b)?;
    if a.coord_count() != b.coord_count() {
        return Err(QotError::DimensionMismatch(format!(
            "coordinate counts differ: {} vs {}",
            a.coord_count(),
            b.coord_count()
        )));
    }
    let m = a.algebra().n_blocks();
    let n = b.algebra().n_blocks();
    let ks: Vec<Vec<_>> = a.coords().iter().map(|k| k.classical_values()).collect();
    let ls: Vec<Vec<_>> = b.coords().iter().map(|l| l.classical_values()).collect();
    let mut c = Vec::with_capacity(m * n);
    for r in 0..n {
        for p in 0..m {
            let mut v = 0.0;
            for (k, l) in ks.iter().zip(&ls) {
                v += (k[p] - l[r]).norm_sqr();
            }
            c.push(v);
        }
    }
    Ok(c)
}

/// Coupling weights in the same ordering as [`cost_vector`].
pub fn plan_vector(plan: &Coupling) -> Vec<f64> {
    let w = plan.classical_matrix();
    let m = w.len();
    let n = if m > 0 { w[0].len() } else { 0 };
    let mut out = Vec::with_capacity(m * n);
    for r in 0..n {
        for p in 0..m {
            out.push(w[p][r]);
        }
    }
    out
}

/// Independent scalar residual of the balance condition
/// `Σ_p ω_pr α_pq = Σ_s ω_qs (ν_r/ν_s) β_rs`, written directly from the
/// transition matrices without the operator machinery.
pub fn balance_residual_scalar(a: &SystemVN, b: &SystemVN, plan: &Coupling) -> Result<f64> {
    require_abelian(a, b)?;
    let m = a.algebra().n_blocks();
    let n = b.algebra().n_blocks();
    let nu = b.state().probs();
    let w = plan.classical_matrix();
    let mut worst: f64 = 0.0;
    for ((name_a, alpha), (name_b, beta)) in a.dynamics().iter().zip(b.dynamics()) {
        if name_a != name_b {
            return Err(QotError::DimensionMismatch(format!(
                "dynamics names do not pair: '{name_a}' vs '{name_b}'"
            )));
        }
        let ta = alpha.matrix();
        let tb = beta.matrix();
        for q in 0..m {
            for r in 0..n {
                let lhs: f64 = (0..m).map(|p| w[p][r] * ta[(p, q)].re).sum();
                let rhs: f64 =
                    (0..n).map(|s| w[q][s] * nu[r] / nu[s] * tb[(r, s)].re).sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// Scalar marginal residuals of a classical plan.
pub fn marginal_residual_scalar(a: &SystemVN, b: &SystemVN, plan: &Coupling) -> Result<f64> {
    require_abelian(a, b)?;
    let mu = a.state().probs();
    let nu = b.state().probs();
    let w = plan.classical_matrix();
    let mut worst: f64 = 0.0;
    for (p, &mp) in mu.iter().enumerate() {
        let row: f64 = w[p].iter().sum();
        worst = worst.max((row - mp).abs());
    }
    for (r, &nr) in nu.iter().enumerate() {
        let col: f64 = w.iter().map(|row| row[r]).sum();
        worst = worst.max((col - nr).abs());
    }
    Ok(worst)
}
