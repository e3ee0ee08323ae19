//! Over-relaxed ADMM for the coupling SDP.
//!
//! Minimizes a linear functional over the intersection of the blockwise PSD
//! cone with the affine constraint rows. The affine projection is a single
//! multiply against orthonormalized rows, the cone projection an
//! eigenvalue clip per pair block.

use nalgebra::DVector;

use crate::layout::PairLayout;
use crate::linalg::psd_project;
use crate::rows::AffineRows;

pub struct AdmmOutcome {
    /// Affine-feasible iterate.
    pub x: DVector<f64>,
    /// Cone-feasible iterate.
    pub z: DVector<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// |c·x − c·z| at termination.
    pub objective_split: f64,
}

pub struct AdmmParams {
    pub max_iter: usize,
    pub tol: f64,
    pub over_relax: f64,
}

impl Default for AdmmParams {
    fn default() -> Self {
        Self { max_iter: 20_000, tol: 1e-11, over_relax: 1.6 }
    }
}

fn cone_project(layout: &PairLayout, v: &DVector<f64>) -> DVector<f64> {
    let blocks = layout.unpack(v);
    let projected: Vec<_> = blocks.iter().map(psd_project).collect();
    layout.pack(&projected)
}

pub fn solve(
    layout: &PairLayout,
    affine: &AffineRows,
    c: &DVector<f64>,
    start: &DVector<f64>,
    params: &AdmmParams,
) -> AdmmOutcome {
    let scale = c.norm().max(1.0);
    let c_scaled = c / scale;
    let mut rho = 1.0;
    let mut z = start.clone();
    let mut u = DVector::zeros(c.len());
    let mut x = z.clone();
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = params.max_iter;
    let gamma = params.over_relax;

    for it in 0..params.max_iter {
        x = affine.project(&(&z - &u - &c_scaled / rho));
        let xh = &x * gamma + &z * (1.0 - gamma);
        let z_new = cone_project(layout, &(&xh + &u));
        u += &xh - &z_new;
        primal = (&x - &z_new).norm();
        dual = rho * (&z_new - &z).norm();
        z = z_new;

        if primal <= params.tol && dual <= params.tol {
            iterations = it + 1;
            break;
        }
        if it % 100 == 99 {
            // standard residual balancing
            if primal > 10.0 * dual {
                rho *= 2.0;
                u /= 2.0;
            } else if dual > 10.0 * primal {
                rho /= 2.0;
                u *= 2.0;
            }
        }
    }
    let objective_split = (c.dot(&x) - c.dot(&z)).abs();
    AdmmOutcome { x, z, iterations, primal_residual: primal, dual_residual: dual, objective_split }
}
