//! Conditional-gradient solver (augmented-Lagrangian Frank-Wolfe).
//!
//! An algorithmically independent second route to the coupling optimum,
//! used to cross-check the splitting solver. The linear minimization oracle
//! runs over the blockwise spectrahedron `{Ω ⪰ 0, tr Ω = 1}`, where it is a
//! minimum-eigenvector computation; the affine rows are enforced through an
//! augmented Lagrangian with a growing penalty.

use nalgebra::DVector;

use crate::layout::PairLayout;
use crate::linalg::{cr, hermitian_eigen, hermitize, CMat};
use crate::rows::AffineRows;

/// Minimize `c·x` over the affine rows intersected with the spectrahedron.
pub fn solve(
    layout: &PairLayout,
    affine: &AffineRows,
    c: &DVector<f64>,
    start: &DVector<f64>,
    iterations: usize,
) -> DVector<f64> {
    let mut x = start.clone();
    let mut y: DVector<f64> = DVector::zeros(affine.n_rows());
    let lambda0 = 4.0 * c.norm().max(1.0);

    for k in 1..=iterations {
        let lambda = lambda0 * (k as f64).sqrt();
        let violation = affine.basis() * &x - affine.rhs();
        let grad = c + affine.basis().transpose() * (&y + &violation * lambda);

        // LMO over the spectrahedron: rank-one mass on the most negative
        // eigenvector across every pair block
        let grad_blocks = layout.unpack(&grad);
        let mut best: Option<(f64, usize, usize)> = None;
        let mut eigvecs: Vec<CMat> = Vec::with_capacity(grad_blocks.len());
        for (t, g) in grad_blocks.iter().enumerate() {
            let (vals, vecs) = hermitian_eigen(&hermitize(g));
            if best.is_none() || vals[0] < best.unwrap().0 {
                best = Some((vals[0], t, 0));
            }
            eigvecs.push(vecs);
        }
        let (_, t_star, _) = best.expect("at least one block");
        let v = eigvecs[t_star].column(0);
        let d = layout.pair_dims()[t_star];
        let mut atom_blocks: Vec<CMat> =
            layout.pair_dims().iter().map(|&dd| CMat::zeros(dd, dd)).collect();
        let mut outer = CMat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                outer[(i, j)] = v[i] * v[j].conj();
            }
        }
        atom_blocks[t_star] = outer.map(|z| z * cr(1.0));
        let atom = layout.pack(&atom_blocks);

        let eta = 2.0 / (k as f64 + 2.0);
        x = &x * (1.0 - eta) + atom * eta;

        // bounded dual step
        let sigma = (lambda0 / (k as f64 + 1.0)).min(lambda * eta * eta);
        y += (affine.basis() * &x - affine.rhs()) * sigma;
    }
    x
}
