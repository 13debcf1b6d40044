//! Cross-checks the ADMM solvers against an independently coded proximal
//! gradient method, the exhaustive face oracle, and the closed-form
//! restricted stationary point.

mod common;

use common::{gaussian_instance, pg_lasso, signs_recovered};
use mcps2::conditions::{candidate_minimizer, sign_bound_check, Hyperparams};
use mcps2::problem::{objective_lasso_parts, objective_mcps2_parts};
use mcps2::solvers::{admm_lasso, admm_mcps2, global_minimize_bruteforce, AdmmInit};
use nalgebra::DVector;

#[test]
fn admm_lasso_matches_an_independent_solver() {
    // Convex problem, two solver families: both must land on the same
    // minimizer to tight tolerance.
    for seed in 0..6u64 {
        let inst = gaussian_instance(30, 40, 4, 1e-3, seed);
        let mut hp = Hyperparams::new(0.05, 30);
        hp.tol_primal = 1e-10;
        hp.tol_dual = 1e-10;
        hp.max_iters = 200_000;
        let admm = admm_lasso(&inst.a, &inst.y, inst.d, &hp, None).unwrap();
        assert!(admm.converged, "seed {seed}: ADMM did not converge");

        let pg = pg_lasso(&inst.a, &inst.y, inst.d, 0.05, 200_000, 1e-12);
        let f_admm = objective_lasso_parts(&inst.a, &inst.y, &admm.x_hat, 0.05);
        let f_pg = objective_lasso_parts(&inst.a, &inst.y, &pg, 0.05);
        assert!(
            (f_admm - f_pg).abs() <= 1e-8,
            "seed {seed}: objectives {f_admm} vs {f_pg}"
        );
        let dx = (&admm.x_hat - &pg).amax();
        assert!(dx <= 1e-5, "seed {seed}: solutions differ by {dx}");
    }
}

#[test]
fn admm_mcps2_recovers_planted_signs_at_generous_sampling() {
    // Well inside the easy regime the nonconvex solver should find the
    // planted sign pattern nearly every time.
    let mut hits = 0;
    let total = 20;
    for seed in 0..total {
        let inst = gaussian_instance(100, 50, 5, 0.0, seed);
        let hp = Hyperparams::new(0.1, 100);
        let out = admm_mcps2(&inst.a, &inst.y, inst.d, &hp, None).unwrap();
        if signs_recovered(&inst, &out.x_hat, 0.25) {
            hits += 1;
        }
    }
    assert!(hits >= 18, "only {hits}/{total} sign recoveries");
}

#[test]
fn warm_started_admm_reaches_the_bruteforce_optimum() {
    // On instances small enough to enumerate, ADMM warm-started at the
    // box-projected closed-form candidate must match the global optimum;
    // the oracle in turn can never be beaten.
    let lambda = 0.08;
    let mut matched = 0;
    let total = 12u64;
    for seed in 0..total {
        let inst = gaussian_instance(8, 6, 2, 1e-3, seed);
        let oracle = global_minimize_bruteforce(&inst.a, &inst.y, inst.d, lambda, 0.01).unwrap();

        let mut hp = Hyperparams::new(lambda, 8);
        hp.tol_primal = 1e-12;
        hp.tol_dual = 1e-12;
        hp.max_iters = 500_000;
        let candidate = candidate_minimizer(&inst, lambda).unwrap();
        let z0 = candidate.x_star.map(|v| v.clamp(-inst.d, inst.d));
        let init = AdmmInit {
            z0,
            u0: DVector::zeros(inst.n()),
        };
        let admm = admm_mcps2(&inst.a, &inst.y, inst.d, &hp, Some(&init)).unwrap();

        let f_admm = objective_mcps2_parts(&inst.a, &inst.y, &admm.x_hat, inst.d, lambda);
        let scale = 1.0 + oracle.objective.abs();
        assert!(
            f_admm >= oracle.objective - 1e-9 * scale,
            "seed {seed}: ADMM {f_admm} undercuts the oracle {}",
            oracle.objective
        );
        if f_admm <= oracle.objective + 1e-6 * scale {
            matched += 1;
        }
    }
    assert!(matched >= 11, "only {matched}/{total} runs matched the oracle");
}

#[test]
fn converged_lasso_admm_cannot_be_worse_than_its_warm_start() {
    // The Lasso is convex, so the converged iterate must (weakly) improve
    // on any feasible starting point.
    let inst = gaussian_instance(30, 40, 4, 1e-3, 3);
    let lambda = 0.05;
    let mut hp = Hyperparams::new(lambda, 30);
    hp.tol_primal = 1e-10;
    hp.tol_dual = 1e-10;
    hp.max_iters = 200_000;
    let z0 = inst.x_true.clone();
    let f_start = objective_lasso_parts(&inst.a, &inst.y, &z0, lambda);
    let init = AdmmInit {
        z0,
        u0: DVector::zeros(inst.n()),
    };
    let out = admm_lasso(&inst.a, &inst.y, inst.d, &hp, Some(&init)).unwrap();
    assert!(out.converged);
    let f_end = objective_lasso_parts(&inst.a, &inst.y, &out.x_hat, lambda);
    assert!(f_end <= f_start + 1e-9, "{f_end} vs start {f_start}");
}

#[test]
fn restricted_solver_lands_on_the_closed_form_candidate() {
    // When the sign bound certifies the candidate and it sits strictly
    // inside the box, the candidate is the unique minimizer of the
    // restricted convex program, so the projected-gradient solver must
    // reproduce it.
    let mut exercised = 0;
    for seed in 0..10u64 {
        let inst = gaussian_instance(20, 30, 3, 1e-3, seed);
        let lambda = 0.05;
        if !sign_bound_check(&inst, lambda).unwrap().pass {
            continue;
        }
        let candidate = candidate_minimizer(&inst, lambda).unwrap();
        if !candidate.within_box || candidate.x_star.amax() >= 0.999 * inst.d {
            continue;
        }
        exercised += 1;
        let mut hp = Hyperparams::new(lambda, 20);
        hp.tol_primal = 1e-12;
        hp.max_iters = 500_000;
        let out = solve_restricted(&inst, lambda, &hp);
        let gap = (&out - &candidate.x_star).amax();
        assert!(gap <= 1e-6, "seed {seed}: solver vs closed form differ by {gap}");
    }
    assert!(exercised >= 5, "only {exercised} certified instances; vacuous");
}

fn solve_restricted(
    inst: &mcps2::problem::ProblemInstance,
    lambda: f64,
    hp: &Hyperparams,
) -> DVector<f64> {
    let mut hp = hp.clone();
    hp.lambda = lambda;
    mcps2::solvers::solve_restricted_convex(&inst.a, &inst.y, inst.d, &inst.support, &hp)
        .unwrap()
        .x_hat
}
