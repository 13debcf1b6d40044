//! Shared helpers for the integration suites. The solvers here are written
//! independently of the library's implementations so they can serve as
//! cross-checking oracles.
//!
//! Each test binary compiles its own copy, so not every helper is used in
//! every binary.
#![allow(dead_code)]

use mcps2::problem::{generate_instance, Ensemble, GeneratorConfig, ProblemInstance};
use nalgebra::{DMatrix, DVector};

pub fn gaussian_instance(
    n: usize,
    m: usize,
    k: usize,
    noise: f64,
    seed: u64,
) -> ProblemInstance {
    generate_instance(&GeneratorConfig {
        n,
        m,
        k,
        d: 1.0,
        magnitude_range: (0.5, 1.0),
        noise_inf_bound: noise,
        rng_seed: seed,
        ensemble: Ensemble::GaussianInvM,
    })
    .expect("generator config is valid")
}

pub fn boundary_instance(n: usize, m: usize, k: usize, seed: u64) -> ProblemInstance {
    generate_instance(&GeneratorConfig {
        n,
        m,
        k,
        d: 1.0,
        magnitude_range: (1.0, 1.0),
        noise_inf_bound: 0.0,
        rng_seed: seed,
        ensemble: Ensemble::GaussianInvM,
    })
    .expect("generator config is valid")
}

/// Independent box-Lasso solver: plain proximal gradient with a fixed
/// 1/σ_max² step, no ADMM machinery shared with the library.
pub fn pg_lasso(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    d: f64,
    lambda: f64,
    max_iters: usize,
    tol: f64,
) -> DVector<f64> {
    let n = a.ncols();
    let sigma_max = a.clone().singular_values()[0];
    let step = 1.0 / (sigma_max * sigma_max);
    let shrink = |v: f64, t: f64| {
        if v > t {
            v - t
        } else if v < -t {
            v + t
        } else {
            0.0
        }
    };
    let mut x = DVector::<f64>::zeros(n);
    for _ in 0..max_iters {
        let grad = a.transpose() * (a * &x - y);
        let next = (&x - &grad * step).map(|v| shrink(v, step * lambda).clamp(-d, d));
        let moved = (&next - &x).norm();
        x = next;
        if moved / step <= tol {
            break;
        }
    }
    x
}

/// ½‖y − Ax‖² + λ‖x‖₁, written against a scalar loop rather than the
/// library's vector expressions.
pub fn lasso_objective_scalar(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    x: &DVector<f64>,
    lambda: f64,
) -> f64 {
    let mut fit = 0.0;
    for i in 0..a.nrows() {
        let mut row = 0.0;
        for j in 0..a.ncols() {
            row += a[(i, j)] * x[j];
        }
        fit += (y[i] - row) * (y[i] - row);
    }
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    0.5 * fit + lambda * l1
}

/// Exact sign recovery of the planted signal, with exactly-zero off-support
/// coordinates tolerated up to `tau`.
pub fn signs_recovered(inst: &ProblemInstance, x: &DVector<f64>, tau: f64) -> bool {
    let mut on = vec![false; inst.n()];
    for &i in &inst.support {
        on[i] = true;
    }
    for i in 0..inst.n() {
        if on[i] {
            if x[i] * inst.x_true[i] <= 0.0 || x[i].abs() <= tau {
                return false;
            }
        } else if x[i].abs() > tau {
            return false;
        }
    }
    true
}
