//! Built-in example families behind the `paper-examples` subcommand and the
//! `paper-example` task.

use serde_json::{json, Value};

use qot_core::fixtures;
use qot_core::optimize::{
    brute_oracle, classical_lp, example_4x2_deviation, wasserstein, SolverOptions,
};
use qot_core::transport::{classical, ConstraintClass};

use crate::report::Outcome;

/// The 4-point/2-point classical family: assembled cost vector, the
/// zero-distance instance with its unique plan, the ε-perturbed asymmetric
/// instance against the LP oracle, and the deviation bound on both.
pub fn classical_4x2(eps: f64, opts: &SolverOptions) -> (Value, Outcome) {
    let mut outcome = Outcome::Ok;
    let mut check = |ok: bool| {
        if !ok {
            outcome = crate::report::worst(outcome, Outcome::AssertionFailed);
        }
        ok
    };

    let (a, b) = fixtures::uniform_zero_instance();
    let cost_vector = classical::cost_vector(&a, &b).expect("abelian pair");
    let cost_vector_exact =
        check(cost_vector == vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0]);

    let uniform = wasserstein(&a, &b, ConstraintClass::Plain, opts).expect("solvable");
    let expected_plan = [0.25, 0.0, 0.25, 0.0, 0.0, 0.25, 0.0, 0.25];
    let plan_vec = classical::plan_vector(&uniform.plan);
    let plan_dev = plan_vec
        .iter()
        .zip(expected_plan)
        .map(|(g, w)| (g - w).abs())
        .fold(0.0_f64, f64::max);
    let uniform_ok = check(uniform.w <= 1e-6 && plan_dev <= 1e-6);
    let uniform_bound = example_4x2_deviation(&a, &b, opts).expect("right shape");
    check(uniform_bound.holds);

    let (ap, bp) = fixtures::perturbed_instance(eps);
    let back = wasserstein(&bp, &ap, ConstraintClass::Plain, opts).expect("solvable");
    let fwd = wasserstein(&ap, &bp, ConstraintClass::Plain, opts).expect("solvable");
    let lp = classical_lp(&ap, &bp, ConstraintClass::Plain, opts).expect("abelian");
    let oracle = brute_oracle(&ap, &bp, ConstraintClass::Plain).expect("small");
    let asymmetry_ok = check(back.w <= 1e-6 && fwd.w >= 1e-3 && (fwd.w - oracle).abs() <= 1e-6);
    let perturbed_bound = example_4x2_deviation(&ap, &bp, opts).expect("right shape");
    check(perturbed_bound.holds);

    let value = json!({
        "cost_vector": cost_vector,
        "cost_vector_exact": cost_vector_exact,
        "uniform_instance": {
            "w": uniform.w,
            "plan": plan_vec,
            "plan_deviation": plan_dev,
            "zero_distance": uniform_ok,
            "f": uniform_bound.f,
            "f_bound": uniform_bound.bound,
            "f_bound_holds": uniform_bound.holds,
        },
        "perturbed_instance": {
            "eps": eps,
            "w_b_to_a": back.w,
            "w_a_to_b": fwd.w,
            "w_lp": lp.w,
            "w_oracle": oracle,
            "asymmetry": asymmetry_ok,
            "f": perturbed_bound.f,
            "f_bound": perturbed_bound.bound,
            "f_bound_holds": perturbed_bound.holds,
        },
    });
    (value, outcome)
}

/// The spin-half family: a grid over (λ, η, φ) with the refined-balance
/// classification and the distance to a fixed 2-point partner, plus a
/// witness that the satisfied side of the criterion reaches `W < 1` with
/// the matched partner `r = s = (1 − λcos η − λ̃cos φ)/2`.
pub fn spin_half(grid: usize, opts: &SolverOptions) -> (Value, Outcome) {
    let mut outcome = Outcome::Ok;
    let n = grid.max(2);
    let lambdas: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let angles: Vec<f64> = (0..n)
        .map(|i| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64)
        .collect();
    let partner = fixtures::spin_half_partner(0.25, 0.25).expect("valid partner");
    let p_state = 0.6;

    let mut rows = Vec::new();
    let mut violations = 0usize;
    for &lambda in &lambdas {
        for &eta in &angles {
            for &phi in &angles {
                let criterion = fixtures::spin_half_criterion(lambda, eta, phi);
                let sys = fixtures::spin_half_system(lambda, eta, phi, p_state, false)
                    .expect("valid system");
                let report = wasserstein(&sys, &partner, ConstraintClass::Plain, opts)
                    .expect("solvable");
                let classification = if criterion.abs() >= 0.1 {
                    if report.w < 1.0 - 1e-4 {
                        violations += 1;
                        "violated-but-w-below-1"
                    } else {
                        "violated"
                    }
                } else {
                    "near-balance"
                };
                rows.push(json!({
                    "lambda": lambda,
                    "eta": eta,
                    "phi": phi,
                    "criterion": criterion,
                    "w": report.w,
                    "classification": classification,
                }));
            }
        }
    }
    if violations > 0 {
        outcome = crate::report::worst(outcome, Outcome::AssertionFailed);
    }

    // witness on the balanced side
    let lambda = lambdas[(n - 1) / 2];
    let (eta, phi) = (0.0, -std::f64::consts::PI);
    let c = lambda * eta.cos() + (1.0 - lambda) * phi.cos();
    let r = (1.0 - c) / 2.0;
    let wit_sys = fixtures::spin_half_system(lambda, eta, phi, 0.5, false).expect("valid");
    let wit_partner = fixtures::spin_half_partner(r, r).expect("valid");
    let witness = wasserstein(&wit_sys, &wit_partner, ConstraintClass::Plain, opts)
        .expect("solvable");
    if witness.w >= 1.0 {
        outcome = crate::report::worst(outcome, Outcome::AssertionFailed);
    }

    let value = json!({
        "grid": n,
        "partner": {"r": 0.25, "s": 0.25},
        "state_p": p_state,
        "table": rows,
        "w_ge_1_when_criterion_violated": violations == 0,
        "witness": {
            "lambda": lambda,
            "eta": eta,
            "phi": phi,
            "r": r,
            "s": r,
            "w": witness.w,
            "below_1": witness.w < 1.0,
        },
    });
    (value, outcome)
}
