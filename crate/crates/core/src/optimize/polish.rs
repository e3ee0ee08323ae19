//! Solution refinement for the splitting and conditional-gradient solvers.
//!
//! Face polish: detect the active face of the PSD iterate, re-solve the
//! affine rows restricted to that face by least squares, and accept the
//! result when it is feasible and does not raise the objective. Zero
//! certification: when the optimum appears to sit at cost zero (the cost is
//! bounded below by zero on feasible plans), alternate projections between
//! the cone and the affine set extended by the row `cost = 0`; a fixed point
//! is a certified optimal plan.

use nalgebra::{DMatrix, DVector};

use crate::basis;
use crate::layout::PairLayout;
use crate::linalg::{cr, hermitian_eigen, hermitize, psd_project, CMat};
use crate::rows::{lstsq_min_norm, AffineRows};

/// Best feasible point found by face polishing, or the input if no face
/// candidate improved on it.
pub fn face_polish(
    layout: &PairLayout,
    affine: &AffineRows,
    c: &DVector<f64>,
    z: &DVector<f64>,
) -> DVector<f64> {
    let blocks = layout.unpack(z);
    let max_eig = blocks
        .iter()
        .map(|b| hermitian_eigen(&hermitize(b)).0.max())
        .fold(1e-300, f64::max);
    let base_cost = c.dot(z);
    let mut best: Option<(f64, DVector<f64>)> = None;

    for tau in [1e-5, 1e-7, 1e-9] {
        let threshold = tau * max_eig;
        // face bases per pair block
        let mut faces: Vec<CMat> = Vec::with_capacity(blocks.len());
        let mut s_dims: Vec<usize> = Vec::with_capacity(blocks.len());
        for b in &blocks {
            let (vals, vecs) = hermitian_eigen(&hermitize(b));
            let keep: Vec<usize> =
                (0..vals.len()).filter(|&i| vals[i] > threshold).collect();
            let mut v = CMat::zeros(b.nrows(), keep.len());
            for (col, &i) in keep.iter().enumerate() {
                v.set_column(col, &vecs.column(i));
            }
            s_dims.push(keep.len());
            faces.push(v);
        }
        let ds: usize = s_dims.iter().map(|&r| r * r).sum();
        if ds == 0 {
            continue;
        }
        // x = T s, columns of T are packings of V H_k V† per face coordinate
        let mut t = DMatrix::zeros(layout.total(), ds);
        let mut col = 0;
        for (bi, v) in faces.iter().enumerate() {
            let r = s_dims[bi];
            for h in basis::hermitian_basis(r) {
                let lifted = v * h * v.adjoint();
                let mut full: Vec<CMat> = layout
                    .pair_dims()
                    .iter()
                    .map(|&d| CMat::zeros(d, d))
                    .collect();
                full[bi] = lifted;
                t.set_column(col, &layout.pack(&full));
                col += 1;
            }
        }
        // current face coordinates of z
        let mut s0 = DVector::zeros(ds);
        let mut off = 0;
        for (bi, v) in faces.iter().enumerate() {
            let r = s_dims[bi];
            let s_block = v.adjoint() * &blocks[bi] * v;
            for (k, &x) in basis::hermitian_coords(&hermitize(&s_block)).iter().enumerate() {
                s0[off + k] = x;
            }
            off += r * r;
        }
        // least-squares correction on the face: A (T s) = b
        let a_s = affine.basis() * &t;
        let resid = affine.rhs() - &a_s * &s0;
        let ds_corr = lstsq_min_norm(&a_s, &resid, 1e-13);
        let s = &s0 + ds_corr;
        // rebuild and clip negligible negative eigenvalues
        let mut x = &t * s;
        let rebuilt = layout.unpack(&x);
        let min_eig = rebuilt
            .iter()
            .map(|b| hermitian_eigen(&hermitize(b)).0.min())
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            continue;
        }
        if min_eig < 0.0 {
            let clipped: Vec<CMat> = rebuilt.iter().map(psd_project).collect();
            x = affine.project(&layout.pack(&clipped));
        }
        let aff_res = affine.residual(&x);
        let cost = c.dot(&x);
        if aff_res <= 1e-10 && cost <= base_cost + 1e-7 {
            match &best {
                Some((bc, _)) if *bc <= cost => {}
                _ => best = Some((cost, x)),
            }
        }
    }
    best.map(|(_, x)| x).unwrap_or_else(|| z.clone())
}

/// Try to certify that the optimum is exactly at `target_cost` by finding a
/// plan in the affine set extended with the cost row. Returns the certified
/// plan coordinates on success.
pub fn certify_cost(
    layout: &PairLayout,
    rows: &[Vec<f64>],
    rhs: &[f64],
    c: &DVector<f64>,
    cost_const: f64,
    target_cost: f64,
    start: &DVector<f64>,
    max_iter: usize,
) -> Option<DVector<f64>> {
    let mut all_rows: Vec<Vec<f64>> = rows.to_vec();
    let mut all_rhs: Vec<f64> = rhs.to_vec();
    all_rows.push(c.iter().copied().collect());
    all_rhs.push(target_cost - cost_const);
    let affine = AffineRows::from_raw(&all_rows, &all_rhs, layout.total(), 1e-11).ok()?;

    let mut x = start.clone();
    let mut stall = f64::INFINITY;
    for it in 0..max_iter {
        let p = affine.project(&x);
        let blocks = layout.unpack(&p);
        let clipped: Vec<CMat> = blocks.iter().map(psd_project).collect();
        let q = layout.pack(&clipped);
        let movement = (&q - &p).norm();
        x = q;
        let res = affine.residual(&x).max(movement);
        if res < 1e-13 {
            let fin = affine.project(&x);
            let min_eig = layout
                .unpack(&fin)
                .iter()
                .map(|b| hermitian_eigen(&hermitize(b)).0.min())
                .fold(f64::INFINITY, f64::min);
            if min_eig > -1e-12 {
                return Some(fin);
            }
            return None;
        }
        // no-progress detection on a long window
        if it % 400 == 399 {
            if res > stall * 0.97 {
                return None;
            }
            stall = res;
        }
    }
    None
}

/// Clip a packed iterate to an exactly valid coupling: project onto the
/// cone, then restore the affine rows, repeated twice.
pub fn final_cleanup(
    layout: &PairLayout,
    affine: &AffineRows,
    x: &DVector<f64>,
) -> DVector<f64> {
    let mut v = x.clone();
    for _ in 0..2 {
        let clipped: Vec<CMat> = layout
            .unpack(&v)
            .iter()
            .map(|b| {
                // drop eigenvalues below a tiny floor to tame -1e-13 noise
                let (vals, vecs) = hermitian_eigen(&hermitize(b));
                let d = CMat::from_diagonal(&vals.map(|e| cr(e.max(0.0))));
                &vecs * d * vecs.adjoint()
            })
            .collect();
        v = affine.project(&layout.pack(&clipped));
    }
    v
}
