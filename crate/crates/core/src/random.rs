//! Seeded random instances: states, channels, chains and coordinate sets.
//!
//! Everything is driven by `ChaCha8Rng` from explicit seeds so property
//! tests and the acceptance suite are reproducible. Random channels are
//! built from random Kraus sets and then projected onto the affine set
//! `{unital, state-preserving}` intersected with the completely positive
//! cone by alternating projections in Choi coordinates.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis;
use crate::finalg::{AlgElement, BlockAlgebra, FaithfulState, SuperOp, SuperOpFlags};
use crate::linalg::{cr, kron, psd_project, CMat, C64};
use crate::layout::PairLayout;
use crate::rows::AffineRows;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; plenty for instance generation
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_complex_matrix(n: usize, m: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(n, m, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// Haar-ish random unitary from the QR of a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_complex_matrix(n, n, rng);
    let qr = g.qr();
    qr.q()
}

/// Random faithful state with spectrum bounded away from zero.
pub fn random_state(alg: &BlockAlgebra, seed: u64) -> FaithfulState {
    let mut r = rng(seed ^ 0xa5a5_a5a5);
    let mut weights: Vec<Vec<f64>> = alg
        .block_dims()
        .iter()
        .map(|&n| (0..n).map(|_| 0.05 + r.random::<f64>()).collect())
        .collect();
    let total: f64 = weights.iter().flatten().sum();
    for w in weights.iter_mut().flatten() {
        *w /= total;
    }
    let rho = alg
        .block_dims()
        .iter()
        .zip(&weights)
        .map(|(&n, w)| {
            let u = random_unitary(n, &mut r);
            let d = CMat::from_diagonal(&DVector::from_iterator(n, w.iter().map(|&x| cr(x))));
            &u * d * u.adjoint()
        })
        .collect();
    FaithfulState::new(alg.clone(), rho).expect("constructed spectrum is faithful")
}

/// Random faithful state that is diagonal in every block (so the blockwise
/// transpose is a reversing operation for it).
pub fn random_diagonal_state(alg: &BlockAlgebra, seed: u64) -> FaithfulState {
    let mut r = rng(seed ^ 0x5a5a_5a5a);
    let mut weights: Vec<Vec<f64>> = alg
        .block_dims()
        .iter()
        .map(|&n| (0..n).map(|_| 0.08 + r.random::<f64>()).collect())
        .collect();
    let total: f64 = weights.iter().flatten().sum();
    for w in weights.iter_mut().flatten() {
        *w /= total;
    }
    let rho = weights
        .iter()
        .map(|w| CMat::from_diagonal(&DVector::from_iterator(w.len(), w.iter().map(|&x| cr(x)))))
        .collect();
    FaithfulState::new(alg.clone(), rho).expect("constructed spectrum is faithful")
}

/// Random Hermitian element with entries of order one.
pub fn random_hermitian_element(alg: &BlockAlgebra, rng: &mut ChaCha8Rng) -> AlgElement {
    let blocks = alg
        .block_dims()
        .iter()
        .map(|&n| {
            let g = random_complex_matrix(n, n, rng);
            (&g + g.adjoint()).scale(0.5 / (n as f64).sqrt())
        })
        .collect();
    AlgElement::new(alg, blocks).expect("shapes match")
}

/// A list of `d` random Hermitian coordinates.
pub fn random_hermitian_coords(alg: &BlockAlgebra, d: usize, seed: u64) -> Vec<AlgElement> {
    let mut r = rng(seed ^ 0xc0c0_c0c0);
    (0..d).map(|_| random_hermitian_element(alg, &mut r)).collect()
}

/// Rebuild the map from its Choi blocks:
/// `E(unit_i(p,q))_j[k,l] = Choi_ij[(p,k),(q,l)]`.
fn superop_from_choi(a: &BlockAlgebra, b: &BlockAlgebra, choi: &[CMat]) -> SuperOp {
    let nbb = b.n_blocks();
    SuperOp::from_action(a, b, |x| {
        let blocks: Vec<CMat> = b
            .block_dims()
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                let mut out = CMat::zeros(m, m);
                for (i, &n) in a.block_dims().iter().enumerate() {
                    let c = &choi[i * nbb + j];
                    let xb = x.block(i);
                    for k in 0..m {
                        for l in 0..m {
                            let mut s = C64::new(0.0, 0.0);
                            for p in 0..n {
                                for q in 0..n {
                                    s += xb[(p, q)] * c[(p * m + k, q * m + l)];
                                }
                            }
                            out[(k, l)] += s;
                        }
                    }
                }
                out
            })
            .collect();
        AlgElement::new(b, blocks).expect("shapes match")
    })
}

/// Affine rows on Choi coordinates expressing unitality and `ν∘E = μ`.
fn channel_affine_rows(
    a: &BlockAlgebra,
    b: &BlockAlgebra,
    mu: &FaithfulState,
    nu: &FaithfulState,
    layout: &PairLayout,
) -> AffineRows {
    let nbb = b.n_blocks();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();

    let row_of_functional = |f: &dyn Fn(usize, usize, &CMat) -> f64| -> Vec<f64> {
        // coefficient of each Hermitian Choi coordinate under a real-linear
        // functional given on (pair index, dim, hermitian basis matrix)
        let mut row = vec![0.0; layout.total()];
        for (t, &d) in layout.pair_dims().iter().enumerate() {
            for (k, h) in basis::hermitian_basis(d).iter().enumerate() {
                row[layout.offset(t) + k] = f(t, d, h);
            }
        }
        row
    };

    // unitality: Σ_i ptr_first(Choi_ij) = 1 per target block j,
    // paired against the Hermitian basis of M_{m_j}
    for (j, &m) in b.block_dims().iter().enumerate() {
        for y in basis::hermitian_basis(m) {
            let row = row_of_functional(&|t, _d, h| {
                let i = t / nbb;
                if t % nbb != j {
                    return 0.0;
                }
                let n = a.block_dims()[i];
                // tr(ptr_first(h) y)
                let pt = crate::linalg::partial_trace_first(h, n, m);
                (pt * &y).trace().re
            });
            rows.push(row);
            rhs.push(y.trace().re);
        }
    }

    // invariance: ν(E(h)) = μ(h) for every Hermitian basis element h of A
    for (i, &n) in a.block_dims().iter().enumerate() {
        for h in basis::hermitian_basis(n) {
            let mut emb = a.zero();
            emb.blocks_mut()[i] = h.clone();
            let target = mu.expect(&emb).re;
            let row = row_of_functional(&|t, _d, hb| {
                if t / nbb != i {
                    return 0.0;
                }
                let j = t % nbb;
                let m = b.block_dims()[j];
                // tr(ρ_ν,j E(h)_j) where E(h)_j[k,l] = Σ_pq h[p,q] C[(p,k),(q,l)]
                let mut s = C64::new(0.0, 0.0);
                let rho = &nu.rho()[j];
                for p in 0..n {
                    for q in 0..n {
                        if h[(p, q)] != C64::new(0.0, 0.0) {
                            for k in 0..m {
                                for l in 0..m {
                                    s += rho[(l, k)] * h[(p, q)] * hb[(p * m + k, q * m + l)];
                                }
                            }
                        }
                    }
                }
                s.re
            });
            rows.push(row);
            rhs.push(target);
        }
    }

    AffineRows::from_raw(&rows, &rhs, layout.total(), 1e-12)
        .expect("channel constraint system is consistent")
}

/// Random unital completely positive `(μ, ν)`-preserving channel.
///
/// A random Kraus pair seeds a Choi matrix which is then driven into the
/// intersection of the CP cone with the unitality/invariance affine set by
/// alternating projections; the constant channel `a ↦ μ(a)1` is blended in
/// to keep the start well inside the cone.
pub fn random_channel(mu: &FaithfulState, nu: &FaithfulState, seed: u64) -> SuperOp {
    let a = mu.algebra();
    let b = nu.algebra();
    let mut r = rng(seed ^ 0xdead_beef);
    let layout = PairLayout::new(a.block_dims(), b.block_dims());
    let affine = channel_affine_rows(a, b, mu, nu, &layout);

    // start: Choi of a random Kraus map blended with the constant channel
    let nbb = b.n_blocks();
    let mut choi: Vec<CMat> = Vec::with_capacity(a.n_blocks() * nbb);
    for (i, &n) in a.block_dims().iter().enumerate() {
        for (j, &m) in b.block_dims().iter().enumerate() {
            // Choi of a ↦ Σ_s K_s† a_i K_s (block i to block j) for random K
            let mut c = CMat::zeros(n * m, n * m);
            for _ in 0..2 {
                let k = random_complex_matrix(n, m, &mut r);
                // Choi[(p,k),(q,l)] = conj(K[p,k'])... assemble via images
                for p in 0..n {
                    for q in 0..n {
                        let mut unit = CMat::zeros(n, n);
                        unit[(p, q)] = cr(1.0);
                        let img = k.adjoint() * unit * &k;
                        for kk in 0..m {
                            for ll in 0..m {
                                c[(p * m + kk, q * m + ll)] += img[(kk, ll)];
                            }
                        }
                    }
                }
            }
            // blend with the constant channel's Choi: ρ_μ,iᵀ ⊗ ρ_ν,j... the
            // Choi of a ↦ μ(a_i) 1_j is (ρ_μ,i)ᵀ ⊗ 1_j
            let const_choi = kron(&mu.rho()[i].transpose(), &CMat::identity(m, m));
            let scale = 1.0 / (c.trace().re.abs().max(1.0));
            choi.push(c.scale(0.5 * scale) + const_choi.scale(0.75));
            let _ = j;
        }
    }

    // alternating projections: affine set, then PSD cone
    let mut x = layout.pack(&choi);
    let mut last_res = f64::INFINITY;
    for it in 0..20_000 {
        x = affine.project(&x);
        let blocks = layout.unpack(&x);
        let projected: Vec<CMat> = blocks.iter().map(psd_project).collect();
        let y = layout.pack(&projected);
        let cone_move = (&y - &x).norm();
        x = y;
        let aff_res = affine.residual(&x);
        let res = aff_res.max(cone_move);
        if res < 1e-13 {
            break;
        }
        if it % 500 == 499 && res > last_res * 0.999_999 {
            // stalled; nudge toward the strictly feasible constant channel
            let mut const_choi = Vec::new();
            for (i, &_n) in a.block_dims().iter().enumerate() {
                for (_j, &m) in b.block_dims().iter().enumerate() {
                    const_choi.push(kron(&mu.rho()[i].transpose(), &CMat::identity(m, m)));
                }
            }
            let xc = layout.pack(&const_choi);
            x = x.scale(0.7) + xc.scale(0.3);
        }
        last_res = res;
    }
    x = affine.project(&x);
    let final_choi = layout.unpack(&x);
    superop_from_choi(a, b, &final_choi)
        .with_flags(SuperOpFlags { unital: true, positive: true, cp: true, anti: false })
        .expect("projected channel satisfies the verified flags")
}

/// Random invariant Markov chain: row-stochastic matrix with a faithful
/// stationary distribution, returned as `(probs, transition)`.
pub fn random_markov_chain(points: usize, seed: u64) -> (Vec<f64>, DMatrix<f64>) {
    let mut r = rng(seed ^ 0x1234_5678);
    loop {
        let mut t = DMatrix::zeros(points, points);
        for p in 0..points {
            let mut row: Vec<f64> = (0..points).map(|_| 0.05 + r.random::<f64>()).collect();
            let s: f64 = row.iter().sum();
            for x in &mut row {
                *x /= s;
            }
            for (q, &x) in row.iter().enumerate() {
                t[(p, q)] = x;
            }
        }
        // stationary distribution by power iteration
        let mut mu = DVector::from_element(points, 1.0 / points as f64);
        for _ in 0..10_000 {
            let next = t.transpose() * &mu;
            let diff = (&next - &mu).amax();
            mu = next;
            let s: f64 = mu.iter().sum();
            mu /= s;
            if diff < 1e-15 {
                break;
            }
        }
        if mu.iter().all(|&p| p > 1e-3) {
            return (mu.iter().copied().collect(), t);
        }
    }
}

/// Random detailed-balanced chain from a symmetric flow matrix:
/// `ν_r β_rs = F_rs = F_sr`.
pub fn random_db_chain(points: usize, seed: u64) -> (Vec<f64>, DMatrix<f64>) {
    let mut r = rng(seed ^ 0x8765_4321);
    let mut flow = DMatrix::zeros(points, points);
    for p in 0..points {
        for q in p..points {
            let f = 0.05 + r.random::<f64>();
            flow[(p, q)] = f;
            flow[(q, p)] = f;
        }
    }
    let total: f64 = flow.iter().sum();
    flow /= total;
    let nu: Vec<f64> = (0..points).map(|p| flow.row(p).sum()).collect();
    let mut t = DMatrix::zeros(points, points);
    for p in 0..points {
        for q in 0..points {
            t[(p, q)] = flow[(p, q)] / nu[p];
        }
    }
    (nu, t)
}

/// Random mixture of diagonal-unitary conjugations on one `M_n` block
/// algebra with a diagonal state; such dynamics always satisfy standard
/// quantum detailed balance with respect to the transpose.
pub fn random_diagonal_unitary_mixture(alg: &BlockAlgebra, seed: u64) -> SuperOp {
    let mut r = rng(seed ^ 0xfeed_f00d);
    let terms = 3;
    let mut weights: Vec<f64> = (0..terms).map(|_| 0.1 + r.random::<f64>()).collect();
    let s: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= s;
    }
    let unitaries: Vec<Vec<CMat>> = (0..terms)
        .map(|_| {
            alg.block_dims()
                .iter()
                .map(|&n| {
                    CMat::from_diagonal(&DVector::from_iterator(
                        n,
                        (0..n).map(|_| {
                            let phi: f64 = r.random::<f64>() * 2.0 * std::f64::consts::PI;
                            C64::new(phi.cos(), phi.sin())
                        }),
                    ))
                })
                .collect()
        })
        .collect();
    SuperOp::from_action(alg, alg, |a| {
        let mut blocks: Vec<CMat> =
            alg.block_dims().iter().map(|&n| CMat::zeros(n, n)).collect();
        for (w, us) in weights.iter().zip(&unitaries) {
            for ((blk, u), ab) in blocks.iter_mut().zip(us).zip(a.blocks()) {
                *blk += (u.adjoint() * ab * u).scale(*w);
            }
        }
        AlgElement::new(alg, blocks).expect("shapes match")
    })
    .with_flags(SuperOpFlags { unital: true, positive: true, cp: true, anti: false })
    .expect("mixture of unitary conjugations is cp and unital")
}

/// Random reversible system on `M_2`: diagonal state, transpose as the
/// reversing operation, `d` random Hermitian coordinates. With `sqdb` the
/// dynamics is a mixture of diagonal-unitary conjugations (which always
/// satisfies standard quantum detailed balance for the transpose);
/// otherwise it is a generic invariant channel.
pub fn random_m2_system(seed: u64, d: usize, sqdb: bool) -> crate::systems::SystemVN {
    let alg = BlockAlgebra::full_matrix(2).expect("M_2");
    let state = random_diagonal_state(&alg, seed);
    let dynamics = if sqdb {
        random_diagonal_unitary_mixture(&alg, seed.wrapping_add(1))
    } else {
        random_channel(&state, &state, seed.wrapping_add(1))
    };
    let theta = SuperOp::transpose_map(&alg);
    let coords = random_hermitian_coords(&alg, d, seed.wrapping_add(2));
    crate::systems::SystemVN::new(state, vec![("alpha".into(), dynamics)], Some(theta), coords)
        .expect("generated system is valid")
}

/// Random classical chain system with identity reversing operation and `d`
/// random real coordinates (Hermitian by construction). With `db` the chain
/// is detailed balanced.
pub fn random_classical_system(
    points: usize,
    seed: u64,
    d: usize,
    db: bool,
) -> crate::systems::SystemVN {
    let (probs, t) = if db {
        random_db_chain(points, seed)
    } else {
        random_markov_chain(points, seed)
    };
    let mut r = rng(seed ^ 0x0dd_ba11);
    let coords: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..points).map(|_| gaussian(&mut r)).collect())
        .collect();
    crate::systems::SystemVN::classical_chain(&probs, &t, coords)
        .expect("generated chain is valid")
}
