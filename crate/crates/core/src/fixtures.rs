//! Built-in worked-example generators: the 4-point/2-point classical family
//! and the spin-half family, shared by the command line front end and the
//! test suites.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::finalg::{AlgElement, BlockAlgebra, FaithfulState, SuperOp, SuperOpFlags};
use crate::linalg::{cr, CMat, C64};
use crate::systems::SystemVN;

/// Classical pair: `A` is the composite of two 2-point chains with points
/// labeled 1=(1,1), 2=(2,1), 3=(1,2), 4=(2,2); `B` is the 2-point chain
/// `[[1-r, r], [s, 1-s]]` with its detailed-balanced stationary state. The
/// single coordinate measures the first spin of `A` and the spin of `B`.
pub fn four_by_two(
    mu: &[f64; 4],
    alpha: &[[f64; 4]; 4],
    r: f64,
    s: f64,
) -> Result<(SystemVN, SystemVN)> {
    let t = DMatrix::from_fn(4, 4, |i, j| alpha[i][j]);
    let a = SystemVN::classical_chain(mu, &t, vec![vec![0.5, -0.5, 0.5, -0.5]])?;
    let nu = [s / (r + s), r / (r + s)];
    let tb = DMatrix::from_row_slice(2, 2, &[1.0 - r, r, s, 1.0 - s]);
    let b = SystemVN::classical_chain(&nu, &tb, vec![vec![0.5, -0.5]])?;
    Ok((a, b))
}

/// Uniform instance with zero transport cost from `A` to `B`.
pub fn uniform_zero_instance() -> (SystemVN, SystemVN) {
    four_by_two(&[0.25; 4], &[[0.25; 4]; 4], 0.5, 0.5).expect("uniform instance is valid")
}

/// The ε-perturbation of the uniform instance that keeps transport from `B`
/// to `A` intact while breaking zero-cost transport from `A` to `B`.
pub fn perturbed_instance(eps: f64) -> (SystemVN, SystemVN) {
    let q = 0.25;
    let mut alpha = [[q; 4]; 4];
    alpha[0][0] += eps;
    alpha[0][2] -= eps;
    alpha[1][0] -= eps; // μ2 α21 ↦ μ2 α21 − μ1 ε with uniform μ
    alpha[1][2] += eps;
    four_by_two(&[0.25; 4], &alpha, 0.5, 0.5).expect("perturbed instance is valid")
}

fn diag_unitary(phase: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), C64::new(phase.cos(), phase.sin())])
}

fn pauli_half() -> [AlgElement; 3] {
    let alg = BlockAlgebra::full_matrix(2).expect("M_2");
    let k1 = AlgElement::new(
        &alg,
        vec![CMat::from_row_slice(2, 2, &[cr(0.5), cr(0.0), cr(0.0), cr(-0.5)])],
    )
    .expect("shape");
    let k2 = AlgElement::new(
        &alg,
        vec![CMat::from_row_slice(2, 2, &[cr(0.0), cr(0.5), cr(0.5), cr(0.0)])],
    )
    .expect("shape");
    let k3 = AlgElement::new(
        &alg,
        vec![CMat::from_row_slice(
            2,
            2,
            &[cr(0.0), C64::new(0.0, -0.5), C64::new(0.0, 0.5), cr(0.0)],
        )],
    )
    .expect("shape");
    [k1, k2, k3]
}

fn spin_half_dynamics(lambda: f64, eta: f64, phi: f64) -> (BlockAlgebra, SuperOp) {
    let alg = BlockAlgebra::full_matrix(2).expect("M_2");
    let u_eta = diag_unitary(eta);
    let u_phi = diag_unitary(phi);
    let alpha = SuperOp::from_action(&alg, &alg, |a| {
        let blk = (u_eta.adjoint() * a.block(0) * &u_eta).scale(lambda)
            + (u_phi.adjoint() * a.block(0) * &u_phi).scale(1.0 - lambda);
        AlgElement::new(&alg, vec![blk]).expect("shape")
    })
    .with_flags(SuperOpFlags { unital: true, positive: true, cp: true, anti: false })
    .expect("mixture of unitary conjugations is cp and unital");
    (alg, alpha)
}

/// Spin-half system `α(a) = λ U_η* a U_η + (1−λ) U_φ* a U_φ` with diagonal
/// state `diag(p, 1−p)` and the half-Pauli coordinates.
///
/// `with_theta` distinguishes the transpose as a reversing operation in the
/// dynamics family (needed for the detailed-balance checks); the worked
/// distances constrain plans by `α` alone, so they use `with_theta = false`.
pub fn spin_half_system(
    lambda: f64,
    eta: f64,
    phi: f64,
    p: f64,
    with_theta: bool,
) -> Result<SystemVN> {
    let (alg, alpha) = spin_half_dynamics(lambda, eta, phi);
    let rho = CMat::from_row_slice(2, 2, &[cr(p), cr(0.0), cr(0.0), cr(1.0 - p)]);
    let state = FaithfulState::new(alg.clone(), vec![rho])?;
    let reversing = with_theta.then(|| SuperOp::transpose_map(&alg));
    let [k1, k2, k3] = pauli_half();
    SystemVN::new(state, vec![("alpha".into(), alpha)], reversing, vec![k1, k2, k3])
}

/// The 2-point partner system with the spin coordinate repeated to d = 3.
pub fn spin_half_partner(r: f64, s: f64) -> Result<SystemVN> {
    let nu = [s / (r + s), r / (r + s)];
    let tb = DMatrix::from_row_slice(2, 2, &[1.0 - r, r, s, 1.0 - s]);
    let l = vec![0.5, -0.5];
    SystemVN::classical_chain(&nu, &tb, vec![l.clone(), l.clone(), l])
}

/// The state-picture action `α*(X) = λ U_η X U_η* + (1−λ) U_φ X U_φ*` used
/// by the probability-flow deviation.
pub fn spin_half_state_action(lambda: f64, eta: f64, phi: f64) -> SuperOp {
    let alg = BlockAlgebra::full_matrix(2).expect("M_2");
    let u_eta = diag_unitary(eta);
    let u_phi = diag_unitary(phi);
    SuperOp::from_action(&alg, &alg, |x| {
        let blk = (&u_eta * x.block(0) * u_eta.adjoint()).scale(lambda)
            + (&u_phi * x.block(0) * u_phi.adjoint()).scale(1.0 - lambda);
        AlgElement::new(&alg, vec![blk]).expect("shape")
    })
}

/// The refined-balance quantity `λ sin η + (1−λ) sin φ`.
pub fn spin_half_criterion(lambda: f64, eta: f64, phi: f64) -> f64 {
    lambda * eta.sin() + (1.0 - lambda) * phi.sin()
}
