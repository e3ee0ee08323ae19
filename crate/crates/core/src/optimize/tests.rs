use super::*;
use crate::finalg::{delta_state, BlockAlgebra, FaithfulState, SuperOp, SuperOpFlags};
use crate::linalg::{cr, CMat, C64};
use crate::random;
use crate::fixtures::{perturbed_instance, spin_half_partner, spin_half_system, uniform_zero_instance};
use crate::transport::classical;
use nalgebra::DMatrix;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn uniform_instance_has_zero_distance_and_unique_plan() {
    let (a, b) = uniform_zero_instance();
    for class in [ConstraintClass::Plain, ConstraintClass::Modular, ConstraintClass::Kms] {
        let lp = classical_lp(&a, &b, class, &opts()).unwrap();
        assert!(lp.w <= 1e-8, "LP W = {} for {:?}", lp.w, class);
        let sdp = wasserstein(&a, &b, class, &opts()).unwrap();
        assert!(sdp.w <= 1e-6, "SDP W = {} for {:?}", sdp.w, class);
        // the zero-cost plan is uniquely (μ1,0,μ3,0,0,μ2,0,μ4)
        let expected = [0.25, 0.0, 0.25, 0.0, 0.0, 0.25, 0.0, 0.25];
        for (got, want) in classical::plan_vector(&lp.plan).iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "LP plan {got} vs {want}");
        }
        for (got, want) in classical::plan_vector(&sdp.plan).iter().zip(expected) {
            assert!((got - want).abs() < 1e-6, "SDP plan {got} vs {want}");
        }
    }
}

#[test]
fn perturbed_instance_is_asymmetric_with_known_value() {
    let (a, b) = perturbed_instance(0.05);
    let back = classical_lp(&b, &a, ConstraintClass::Plain, &opts()).unwrap();
    assert!(back.w <= 1e-8, "W(B,A) = {}", back.w);
    let fwd = classical_lp(&a, &b, ConstraintClass::Plain, &opts()).unwrap();
    // the balance rows force γ1+γ2 = 1/4 and γ1+γ3 = γ2+γ4, so the optimal
    // cost is 1/4 independent of ε
    assert!((fwd.cost - 0.25).abs() < 1e-9, "cost {}", fwd.cost);
    assert!((fwd.w - 0.5).abs() < 1e-9);
    let oracle = brute_oracle(&a, &b, ConstraintClass::Plain).unwrap();
    assert!((fwd.w - oracle).abs() < 1e-9, "oracle {oracle}");
    let sdp = wasserstein(&a, &b, ConstraintClass::Plain, &opts()).unwrap();
    assert!((sdp.w - fwd.w).abs() < 1e-6, "sdp {} vs lp {}", sdp.w, fwd.w);
}

#[test]
fn self_distance_vanishes_for_quantum_systems() {
    for seed in [1u64, 2] {
        let sys = random::random_m2_system(seed, 2, false);
        for class in [ConstraintClass::Plain, ConstraintClass::Kms] {
            let report = wasserstein(&sys, &sys, class, &opts()).unwrap();
            assert!(report.w <= 1e-5, "seed {seed} {:?}: W = {}", class, report.w);
            assert!(report.max_residual() <= 1e-8);
            // optimal plan is cost-equivalent to the entangled diagonal plan
            let delta_cost =
                crate::transport::cost(&delta_state(sys.state()), &sys, &sys).unwrap();
            assert!((report.cost - delta_cost).abs() <= 1e-9);
        }
    }
}

#[test]
fn product_only_feasible_set_reproduces_product_cost() {
    // swap dynamics on A against identity dynamics on B forces ω = μ ⊗ ν'
    let a = SystemVN::classical_chain(
        &[0.5, 0.5],
        &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        vec![vec![1.0, -1.0]],
    )
    .unwrap();
    let b = SystemVN::classical_chain(
        &[0.5, 0.5],
        &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
        vec![vec![1.0, -1.0]],
    )
    .unwrap();
    let set = crate::transport::build_constraints(&a, &b, ConstraintClass::Plain).unwrap();
    let aff = set.compressed(1e-11).unwrap();
    assert_eq!(aff.n_rows(), 4, "balance must cut the polytope to a point");
    let prod = crate::finalg::Coupling::product(a.state(), b.state());
    let expected = crate::transport::cost(&prod, &a, &b).unwrap();
    let lp = classical_lp(&a, &b, ConstraintClass::Plain, &opts()).unwrap();
    assert!((lp.cost - expected).abs() < 1e-10);
    let oracle = brute_oracle(&a, &b, ConstraintClass::Plain).unwrap();
    assert!((oracle - expected.max(0.0).sqrt()).abs() < 1e-8);
}

#[test]
fn lp_sdp_and_vertex_oracle_agree_on_random_classical_pairs() {
    for seed in 0..4u64 {
        let a = random::random_classical_system(3, 1000 + seed, 2, false);
        let b = random::random_classical_system(2, 2000 + seed, 2, false);
        for class in [ConstraintClass::Plain, ConstraintClass::Kms] {
            let lp = classical_lp(&a, &b, class, &opts()).unwrap();
            let sdp = wasserstein(&a, &b, class, &opts()).unwrap();
            let oracle = brute_oracle(&a, &b, class).unwrap();
            assert!(
                (lp.w - sdp.w).abs() < 1e-6,
                "seed {seed} {:?}: lp {} sdp {}",
                class,
                lp.w,
                sdp.w
            );
            assert!((lp.w - oracle).abs() < 1e-6, "seed {seed}: lp {} oracle {}", lp.w, oracle);
        }
    }
}

#[test]
fn splitting_and_conditional_gradient_agree_on_quantum_pairs() {
    for seed in 0..3u64 {
        let a = random::random_m2_system(3000 + seed, 2, false);
        let b = random::random_m2_system(4000 + seed, 2, false);
        let sdp = wasserstein(&a, &b, ConstraintClass::Plain, &opts()).unwrap();
        let oracle = brute_oracle(&a, &b, ConstraintClass::Plain).unwrap();
        assert!(
            (sdp.w - oracle).abs() < 1e-5,
            "seed {seed}: sdp {} oracle {}",
            sdp.w,
            oracle
        );
    }
}

#[test]
fn zero_distance_extracts_homomorphism() {
    let (a, b) = uniform_zero_instance();
    let report = wasserstein(&a, &b, ConstraintClass::Plain, &opts()).unwrap();
    assert!(report.w <= 1e-5);
    let iso = extract_isomorphism(&report, &a, &b).unwrap();
    assert!(iso.homomorphism_residual <= 1e-5, "hom {}", iso.homomorphism_residual);
    assert!(iso.coordinate_match_residual <= 1e-5, "coord {}", iso.coordinate_match_residual);
    assert!(iso.intertwining_residual <= 1e-5, "intertwine {}", iso.intertwining_residual);

    // identity case: A against itself with generating hermitian coordinates
    let sys = random::random_m2_system(77, 3, false);
    let self_report = wasserstein(&sys, &sys, ConstraintClass::Kms, &opts()).unwrap();
    let iso2 = extract_isomorphism(&self_report, &sys, &sys).unwrap();
    assert!(iso2.coordinate_match_residual <= 1e-5);
    assert!(iso2.homomorphism_residual <= 1e-4, "hom {}", iso2.homomorphism_residual);
    assert!(iso2.invertibility_residual <= 1e-4);
}

#[test]
fn sqdb_bound_holds_on_reversible_pairs() {
    // A itself satisfying θ-sqdb against B = A: both sides vanish
    let a = random::random_m2_system(50, 2, true);
    let report = sqdb_bound_check(&a, &a, ConstraintClass::Modular, &opts()).unwrap();
    assert!(report.w_a_to_reverse <= 1e-5);
    assert!(report.forward_holds && report.mirrored_holds);

    // a non-sqdb A against an sqdb B
    let a2 = random::random_m2_system(51, 2, false);
    let b2 = random::random_m2_system(52, 2, true);
    for class in [ConstraintClass::Modular, ConstraintClass::Kms] {
        let rep = sqdb_bound_check(&a2, &b2, class, &opts()).unwrap();
        assert!(rep.forward_holds, "forward: {} vs 2*{}", rep.w_a_to_reverse, rep.w_a_to_b);
        assert!(rep.mirrored_holds, "mirrored: {} vs 2*{}", rep.w_reverse_to_a, rep.w_b_to_a);
    }

    // B failing sqdb is rejected
    let b_bad = random::random_m2_system(53, 2, false);
    if !b_bad.check_theta_sqdb().unwrap().balanced {
        assert!(matches!(
            sqdb_bound_check(&a2, &b_bad, ConstraintClass::Modular, &opts()),
            Err(QotError::SqdbViolated(_))
        ));
    }
}

#[test]
fn classical_sqdb_bound_with_w_equal_w_sigma() {
    // classical 4-point A vs detailed-balanced 2-point B: W = W_σ and the
    // bound holds
    let a = random::random_classical_system(4, 60, 1, false);
    let b = random::random_classical_system(2, 61, 1, true);
    let rep = sqdb_bound_check(&a, &b, ConstraintClass::Modular, &opts()).unwrap();
    assert!(rep.forward_holds && rep.mirrored_holds);
    let plain = wasserstein(&a, &b, ConstraintClass::Plain, &opts()).unwrap();
    let modular = wasserstein(&a, &b, ConstraintClass::Modular, &opts()).unwrap();
    assert!((plain.w - modular.w).abs() <= 1e-6, "{} vs {}", plain.w, modular.w);
}

#[test]
fn deviation_bound_on_the_4x2_family() {
    // uniform zero-distance instance: f = 0, W = 0
    let (a, b) = uniform_zero_instance();
    let rep = example_4x2_deviation(&a, &b, &opts()).unwrap();
    assert!(rep.f.abs() < 1e-12 && rep.w < 1e-8 && rep.holds);
    assert_eq!(rep.simple_holds, Some(true));

    // perturbed instance: f > 0, bound still holds
    let (a2, b2) = perturbed_instance(0.05);
    let rep2 = example_4x2_deviation(&a2, &b2, &opts()).unwrap();
    assert!(rep2.f > 1e-3, "f = {}", rep2.f);
    assert!(rep2.holds, "f = {} vs bound {}", rep2.f, rep2.bound);

    // wrong shape is rejected
    let c = random::random_classical_system(3, 70, 1, false);
    assert!(matches!(
        example_4x2_deviation(&c, &b, &opts()),
        Err(QotError::WrongShape(_))
    ));
}

#[test]
fn spin_half_distance_respects_the_refined_balance_criterion() {
    // violated criterion (λ sin η + λ̃ sin φ = sin(π/3) ≠ 0): W ≥ 1
    let a = spin_half_system(1.0, std::f64::consts::FRAC_PI_3, 0.0, 0.55, false).unwrap();
    let b = spin_half_partner(0.3, 0.3).unwrap();
    let report = wasserstein(&a, &b, ConstraintClass::Plain, &opts()).unwrap();
    assert!(report.w >= 1.0 - 1e-4, "W = {}", report.w);

    // satisfied criterion at η = 0, φ = π with matching 1 − r − s = c:
    // cost 3/2 − √2 ν_1 r/max(r,s) < 1 is reachable
    let lambda = 0.5;
    let c = 2.0 * lambda - 1.0; // λ cos 0 + (1−λ) cos π
    let r = (1.0 - c) / 2.0;
    let a2 = spin_half_system(lambda, 0.0, std::f64::consts::PI, 0.5, false).unwrap();
    let b2 = spin_half_partner(r, r).unwrap();
    let report2 = wasserstein(&a2, &b2, ConstraintClass::Plain, &opts()).unwrap();
    let expected = 1.5 - std::f64::consts::FRAC_1_SQRT_2;
    assert!(report2.w < 1.0, "W = {}", report2.w);
    assert!((report2.cost - expected).abs() < 1e-5, "cost {} vs {}", report2.cost, expected);
}
