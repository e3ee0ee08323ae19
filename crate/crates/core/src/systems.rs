//! System bundles: an algebra, a faithful invariant state, a named family of
//! dynamics, optional reversing operation and coordinates.
//!
//! System-level duals reuse the channel duals blockwise: the dual system
//! lives on the commutant (encoded on the same blocks with transposed state
//! density and conjugated coordinates), the KMS dual keeps state and
//! coordinates, and the reverse conjugates the KMS dual by the reversing
//! operation.

use serde::{Deserialize, Serialize};

use crate::error::{QotError, Result};
use crate::finalg::{
    dual_channel, kms_dual, theta_kms_dual, verify_reversing, AlgElement, BlockAlgebra,
    FaithfulState, SuperOp, SuperOpFlags,
};

const TOL_SYSTEM: f64 = 1e-10;
/// Detailed-balance decision threshold.
pub const TOL_DB: f64 = 1e-9;

/// A finite-dimensional dynamical system `(A, α, μ, k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemVN {
    algebra: BlockAlgebra,
    state: FaithfulState,
    dynamics: Vec<(String, SuperOp)>,
    reversing: Option<SuperOp>,
    coords: Vec<AlgElement>,
}

/// Outcome of a detailed-balance check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceReport {
    /// `classical` or `theta-sqdb`.
    pub kind: String,
    pub residual: f64,
    pub balanced: bool,
}

impl SystemVN {
    pub fn new(
        state: FaithfulState,
        dynamics: Vec<(String, SuperOp)>,
        reversing: Option<SuperOp>,
        coords: Vec<AlgElement>,
    ) -> Result<Self> {
        let algebra = state.algebra().clone();
        for (name, map) in &dynamics {
            if map.source() != &algebra || map.target() != &algebra {
                return Err(QotError::ShapeMismatch(format!(
                    "dynamics '{name}' does not act on the system algebra"
                )));
            }
            let u = map.unital_residual();
            if u > TOL_SYSTEM {
                return Err(QotError::NotUnital(u));
            }
            let inv = map.invariance_residual(&state, &state);
            if inv > TOL_SYSTEM {
                return Err(QotError::InvarianceViolated(inv));
            }
            if !(map.flags().positive || map.flags().cp) {
                return Err(QotError::NotPositive(format!(
                    "dynamics '{name}' must carry a verified positive or cp flag"
                )));
            }
        }
        if let Some(theta) = &reversing {
            verify_reversing(theta, &state)?;
        }
        for k in &coords {
            if !k.matches(&algebra) {
                return Err(QotError::ShapeMismatch("coordinate outside the algebra".into()));
            }
        }
        Ok(Self { algebra, state, dynamics, reversing, coords })
    }

    /// Classical Markov chain system from a probability row and a
    /// row-stochastic transition matrix, with the identity as reversing
    /// operation and the given coordinate functions.
    pub fn classical_chain(
        probs: &[f64],
        transition: &nalgebra::DMatrix<f64>,
        coords: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let state = FaithfulState::classical(probs)?;
        let alg = state.algebra().clone();
        let alpha = SuperOp::classical_transition(&alg, transition)?
            .with_flags(SuperOpFlags { unital: true, positive: true, cp: true, anti: false })?;
        let theta = SuperOp::identity(&alg)
            .with_flags(SuperOpFlags { unital: true, positive: true, cp: true, anti: true })?;
        let coords = coords.iter().map(|c| AlgElement::classical(c)).collect();
        Self::new(state, vec![("alpha".into(), alpha)], Some(theta), coords)
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn state(&self) -> &FaithfulState {
        &self.state
    }

    pub fn dynamics(&self) -> &[(String, SuperOp)] {
        &self.dynamics
    }

    pub fn reversing(&self) -> Option<&SuperOp> {
        self.reversing.as_ref()
    }

    pub fn coords(&self) -> &[AlgElement] {
        &self.coords
    }

    pub fn coord_count(&self) -> usize {
        self.coords.len()
    }

    pub fn is_reversible(&self) -> bool {
        self.reversing.is_some()
    }

    /// The dual system `(A′, α′, μ′, k′)` in the commutant encoding: state
    /// density transposed, dynamics replaced by their duals, coordinates
    /// conjugated entrywise (`j(k*) = π′(conj k)`).
    pub fn dual_system(&self) -> Result<SystemVN> {
        let state = self.state.transposed();
        let dynamics = self
            .dynamics
            .iter()
            .map(|(name, map)| Ok((name.clone(), dual_channel(map, &self.state, &self.state)?)))
            .collect::<Result<Vec<_>>>()?;
        let reversing = self
            .reversing
            .as_ref()
            .map(|theta| dual_channel(theta, &self.state, &self.state))
            .transpose()?;
        let coords = self.coords.iter().map(|k| k.conj()).collect();
        SystemVN::new(state, dynamics, reversing, coords)
    }

    /// The KMS dual `(A, α^σ, μ, k)`.
    pub fn kms_dual_system(&self) -> Result<SystemVN> {
        let dynamics = self
            .dynamics
            .iter()
            .map(|(name, map)| Ok((name.clone(), kms_dual(map, &self.state, &self.state)?)))
            .collect::<Result<Vec<_>>>()?;
        // θ^σ = θ for any reversing operation; recompute rather than copy
        let reversing = self
            .reversing
            .as_ref()
            .map(|theta| kms_dual(theta, &self.state, &self.state))
            .transpose()?;
        SystemVN::new(self.state.clone(), dynamics, reversing, self.coords.clone())
    }

    /// The reverse `(A, α^←, μ, k)`; requires a reversing operation, which
    /// is preserved (`θ^← = θ`).
    pub fn reverse_system(&self) -> Result<SystemVN> {
        let theta = self.reversing.as_ref().ok_or(QotError::NoReversingOperation)?;
        let dynamics = self
            .dynamics
            .iter()
            .map(|(name, map)| {
                Ok((name.clone(), theta_kms_dual(map, &self.state, &self.state, theta, theta)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let reversing = Some(theta_kms_dual(theta, &self.state, &self.state, theta, theta)?);
        SystemVN::new(self.state.clone(), dynamics, reversing, self.coords.clone())
    }

    /// Classical detailed balance `ν_r β_rs = ν_s β_sr` (abelian systems):
    /// max residual over all dynamics entries.
    pub fn check_detailed_balance(&self) -> Result<BalanceReport> {
        if self.algebra.abelian() {
            let probs = self.state.probs();
            let n = probs.len();
            let mut worst: f64 = 0.0;
            for (_, map) in &self.dynamics {
                let t = map.matrix();
                for r in 0..n {
                    for s in 0..n {
                        let flow = probs[r] * t[(r, s)].re - probs[s] * t[(s, r)].re;
                        worst = worst.max(flow.abs());
                    }
                }
            }
            Ok(BalanceReport {
                kind: "classical".into(),
                residual: worst,
                balanced: worst <= TOL_DB,
            })
        } else {
            self.check_theta_sqdb()
        }
    }

    /// Standard quantum detailed balance with respect to the system's
    /// reversing operation: residual `max ‖α^← − α‖` over the dynamics.
    pub fn check_theta_sqdb(&self) -> Result<BalanceReport> {
        let theta = self.reversing.as_ref().ok_or(QotError::NoReversingOperation)?;
        let mut worst: f64 = 0.0;
        for (_, map) in &self.dynamics {
            let rev = theta_kms_dual(map, &self.state, &self.state, theta, theta)?;
            worst = worst.max(rev.matrix_max_abs_diff(map));
        }
        Ok(BalanceReport { kind: "theta-sqdb".into(), residual: worst, balanced: worst <= TOL_DB })
    }

    /// Whether the coordinate multiset is closed under adjoints.
    pub fn is_hermitian(&self) -> bool {
        let adjoints: Vec<AlgElement> = self.coords.iter().map(|k| k.adjoint()).collect();
        matchable(&adjoints, &self.coords, 1e-12)
    }

    /// Equality of state, coordinates and dynamics matrices within `tol`.
    pub fn approx_eq(&self, other: &SystemVN, tol: f64) -> bool {
        if self.algebra != other.algebra
            || !self.state.approx_eq(&other.state, tol)
            || self.dynamics.len() != other.dynamics.len()
            || self.coords.len() != other.coords.len()
        {
            return false;
        }
        for ((na, ma), (nb, mb)) in self.dynamics.iter().zip(&other.dynamics) {
            if na != nb || !ma.approx_eq(mb, tol) {
                return false;
            }
        }
        for (ka, kb) in self.coords.iter().zip(&other.coords) {
            if ka.max_abs_diff(kb) > tol {
                return false;
            }
        }
        match (&self.reversing, &other.reversing) {
            (None, None) => true,
            (Some(a), Some(b)) => a.approx_eq(b, tol),
            _ => false,
        }
    }
}

/// Perfect matching between two equally sized lists under a distance
/// tolerance (augmenting-path bipartite matching).
fn matchable(left: &[AlgElement], right: &[AlgElement], tol: f64) -> bool {
    let n = left.len();
    if right.len() != n {
        return false;
    }
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|l| {
            right
                .iter()
                .enumerate()
                .filter(|(_, r)| l.max_abs_diff(r) <= tol)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut matched_to: Vec<Option<usize>> = vec![None; n];
    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        matched_to: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                if matched_to[j].is_none()
                    || augment(matched_to[j].unwrap(), adj, matched_to, seen)
                {
                    matched_to[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    (0..n).all(|i| {
        let mut seen = vec![false; n];
        augment(i, &adj, &mut matched_to, &mut seen)
    })
}
