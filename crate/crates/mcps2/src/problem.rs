//! Instance model and seeded generation.
//!
//! An instance is the measurement model `y = A·x_true + eta` together with
//! the box radius `d`. The ground truth is k-sparse with support `S`,
//! `mu = min_{i∈S} |x_true_i| / d ∈ (0, 1]` records how far the smallest
//! nonzero sits from the penalty's flat region.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Random ensembles for the sensing matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Entries i.i.d. N(0, 1/m): unit expected column norm.
    GaussianInvM,
}

/// Everything needed to regenerate an instance bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Box radius; also the magnitude at which the concave penalty flattens.
    pub d: f64,
    /// Closed range `[lo, hi]` for the nonzero magnitudes, `0 < lo <= hi <= d`.
    pub magnitude_range: (f64, f64),
    /// Exact ∞-norm of the noise vector; 0 means noise-free.
    pub noise_inf_bound: f64,
    pub rng_seed: u64,
    pub ensemble: Ensemble,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Config("n and m must be positive".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k = 0 is disallowed (empty support)".into()));
        }
        if self.k > self.m || self.k > self.n {
            return Err(Error::Config(format!(
                "k = {} must satisfy k <= min(m, n) = {}",
                self.k,
                self.m.min(self.n)
            )));
        }
        if !(self.d > 0.0) {
            return Err(Error::Config("d must be positive".into()));
        }
        let (lo, hi) = self.magnitude_range;
        if !(lo > 0.0) || lo > hi {
            return Err(Error::Config(format!(
                "magnitude range [{lo}, {hi}] is empty or nonpositive"
            )));
        }
        if hi > self.d {
            return Err(Error::Config(format!(
                "magnitudes up to {hi} exceed the box radius d = {}",
                self.d
            )));
        }
        if !(self.noise_inf_bound >= 0.0) {
            return Err(Error::Config("noise_inf_bound must be >= 0".into()));
        }
        Ok(())
    }
}

/// One measurement problem. `support` is sorted ascending, 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    /// Sensing matrix, m×n.
    pub a: DMatrix<f64>,
    pub x_true: DVector<f64>,
    pub eta: DVector<f64>,
    /// `a * x_true + eta`.
    pub y: DVector<f64>,
    pub support: Vec<usize>,
    pub d: f64,
    pub k: usize,
    /// `min_{i in S} |x_true_i| / d`.
    pub mu: f64,
    /// Present when the instance came out of [`generate_instance`].
    pub generator: Option<GeneratorConfig>,
}

impl ProblemInstance {
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Indices outside the support, ascending.
    pub fn complement(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n() - self.k);
        let mut s = self.support.iter().peekable();
        for j in 0..self.n() {
            if s.peek() == Some(&&j) {
                s.next();
            } else {
                out.push(j);
            }
        }
        out
    }

    /// Build an instance from explicit parts. Support and `mu` are derived
    /// from the exact nonzeros of `x_true`; `y` is assembled from the model.
    pub fn from_parts(
        a: DMatrix<f64>,
        x_true: DVector<f64>,
        eta: DVector<f64>,
        d: f64,
    ) -> Result<Self> {
        if x_true.len() != a.ncols() {
            return Err(Error::Config(format!(
                "x_true has length {} but A has {} columns",
                x_true.len(),
                a.ncols()
            )));
        }
        if eta.len() != a.nrows() {
            return Err(Error::Config(format!(
                "eta has length {} but A has {} rows",
                eta.len(),
                a.nrows()
            )));
        }
        if !(d > 0.0) {
            return Err(Error::Config("d must be positive".into()));
        }
        let support: Vec<usize> = (0..x_true.len()).filter(|&i| x_true[i] != 0.0).collect();
        if support.is_empty() {
            return Err(Error::Config("x_true has empty support".into()));
        }
        let min_mag = support
            .iter()
            .map(|&i| x_true[i].abs())
            .fold(f64::INFINITY, f64::min);
        let max_mag = support
            .iter()
            .map(|&i| x_true[i].abs())
            .fold(0.0_f64, f64::max);
        if max_mag > d {
            return Err(Error::Config(format!(
                "|x_true| reaches {max_mag} outside the box of radius {d}"
            )));
        }
        let y = &a * &x_true + &eta;
        let k = support.len();
        Ok(ProblemInstance {
            a,
            x_true,
            eta,
            y,
            support,
            d,
            k,
            mu: min_mag / d,
            generator: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&InstanceFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }
}

/// Draw an instance. The draw order is fixed and part of the reproducibility
/// contract: support subset, magnitudes, signs, matrix entries in
/// column-major order, then noise.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<ProblemInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let (n, m, k) = (cfg.n, cfg.m, cfg.k);

    let mut support: Vec<usize> = rand::seq::index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();

    let (lo, hi) = cfg.magnitude_range;
    let magnitudes: Vec<f64> = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
    let signs: Vec<f64> = (0..k)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();

    let mut x_true = DVector::zeros(n);
    for (slot, &i) in support.iter().enumerate() {
        x_true[i] = signs[slot] * magnitudes[slot];
    }

    let scale = match cfg.ensemble {
        Ensemble::GaussianInvM => (1.0 / m as f64).sqrt(),
    };
    let mut a = DMatrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            let g: f64 = StandardNormal.sample(&mut rng);
            a[(i, j)] = scale * g;
        }
    }

    let mut eta = DVector::zeros(m);
    if cfg.noise_inf_bound > 0.0 {
        for i in 0..m {
            eta[i] = rng.random_range(-1.0..=1.0);
        }
        let (argmax, maxabs) = eta
            .iter()
            .enumerate()
            .map(|(i, v): (usize, &f64)| (i, v.abs()))
            .fold((0usize, 0.0f64), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if maxabs == 0.0 {
            // Vanishing draw (probability zero); pin one coordinate.
            eta[0] = cfg.noise_inf_bound;
        } else {
            let s = cfg.noise_inf_bound / maxabs;
            for i in 0..m {
                eta[i] *= s;
            }
            // Make the ∞-norm exact rather than exact-up-to-one-ulp.
            eta[argmax] = eta[argmax].signum() * cfg.noise_inf_bound;
        }
    }

    let y = &a * &x_true + &eta;
    let mu = magnitudes.iter().copied().fold(f64::INFINITY, f64::min) / cfg.d;
    Ok(ProblemInstance {
        a,
        x_true,
        eta,
        y,
        support,
        d: cfg.d,
        k,
        mu,
        generator: Some(cfg.clone()),
    })
}

/// Columns of `a` selected by `idx`, in the order given.
pub fn restrict_columns(a: &DMatrix<f64>, idx: &[usize]) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(a.nrows(), idx.len());
    for (slot, &j) in idx.iter().enumerate() {
        if j >= a.ncols() {
            return Err(Error::Config(format!(
                "column index {} out of range for {} columns",
                j,
                a.ncols()
            )));
        }
        out.set_column(slot, &a.column(j));
    }
    Ok(out)
}

/// `½‖y − Ax‖₂² + λ(d‖x‖₁ − ½‖x‖₂²)`.
pub fn objective_mcps2(inst: &ProblemInstance, x: &DVector<f64>, lambda: f64) -> f64 {
    assert_eq!(x.len(), inst.n(), "objective_mcps2: x has wrong length");
    objective_mcps2_parts(&inst.a, &inst.y, x, inst.d, lambda)
}

/// `½‖y − Ax‖₂² + λ‖x‖₁`.
pub fn objective_lasso(inst: &ProblemInstance, x: &DVector<f64>, lambda: f64) -> f64 {
    assert_eq!(x.len(), inst.n(), "objective_lasso: x has wrong length");
    objective_lasso_parts(&inst.a, &inst.y, x, lambda)
}

/// [`objective_mcps2`] for callers holding the measurement parts directly.
pub fn objective_mcps2_parts(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    x: &DVector<f64>,
    d: f64,
    lambda: f64,
) -> f64 {
    assert_eq!(x.len(), a.ncols(), "objective_mcps2_parts: x has wrong length");
    let r = y - a * x;
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    0.5 * r.norm_squared() + lambda * (d * l1 - 0.5 * x.norm_squared())
}

/// [`objective_lasso`] for callers holding the measurement parts directly.
pub fn objective_lasso_parts(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    x: &DVector<f64>,
    lambda: f64,
) -> f64 {
    assert_eq!(x.len(), a.ncols(), "objective_lasso_parts: x has wrong length");
    let r = y - a * x;
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    0.5 * r.norm_squared() + lambda * l1
}

/// On-disk form: self-describing JSON with the matrix stored row by row.
/// Support indices are 0-based.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format: String,
    n: usize,
    m: usize,
    k: usize,
    d: f64,
    mu: f64,
    seed: Option<u64>,
    generator: Option<GeneratorConfig>,
    support: Vec<usize>,
    x_true: Vec<f64>,
    eta: Vec<f64>,
    y: Vec<f64>,
    matrix_rows: Vec<Vec<f64>>,
}

const INSTANCE_FORMAT: &str = "mcps2/instance/v1";

impl From<&ProblemInstance> for InstanceFile {
    fn from(inst: &ProblemInstance) -> Self {
        InstanceFile {
            format: INSTANCE_FORMAT.to_string(),
            n: inst.n(),
            m: inst.m(),
            k: inst.k,
            d: inst.d,
            mu: inst.mu,
            seed: inst.generator.as_ref().map(|g| g.rng_seed),
            generator: inst.generator.clone(),
            support: inst.support.clone(),
            x_true: inst.x_true.iter().copied().collect(),
            eta: inst.eta.iter().copied().collect(),
            y: inst.y.iter().copied().collect(),
            matrix_rows: (0..inst.m())
                .map(|i| inst.a.row(i).iter().copied().collect())
                .collect(),
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<ProblemInstance> {
        if self.format != INSTANCE_FORMAT {
            return Err(Error::Parse(format!(
                "unknown instance format {:?}",
                self.format
            )));
        }
        if self.matrix_rows.len() != self.m
            || self.matrix_rows.iter().any(|r| r.len() != self.n)
        {
            return Err(Error::Parse("matrix_rows shape disagrees with n, m".into()));
        }
        if self.x_true.len() != self.n || self.eta.len() != self.m || self.y.len() != self.m {
            return Err(Error::Parse("vector lengths disagree with n, m".into()));
        }
        if self.support.len() != self.k
            || self.support.windows(2).any(|w| w[0] >= w[1])
            || self.support.iter().any(|&i| i >= self.n)
        {
            return Err(Error::Parse(
                "support must be strictly increasing, 0-based, of length k".into(),
            ));
        }
        if self.support.iter().any(|&i| self.x_true[i] == 0.0)
            || (0..self.n)
                .filter(|i| self.x_true[*i] != 0.0)
                .count()
                != self.k
        {
            return Err(Error::Parse("support disagrees with nonzeros of x_true".into()));
        }
        let a = DMatrix::from_fn(self.m, self.n, |i, j| self.matrix_rows[i][j]);
        let inst = ProblemInstance {
            a,
            x_true: DVector::from_vec(self.x_true),
            eta: DVector::from_vec(self.eta),
            y: DVector::from_vec(self.y),
            support: self.support,
            d: self.d,
            k: self.k,
            mu: self.mu,
            generator: self.generator,
        };
        if !(inst.d > 0.0) {
            return Err(Error::Parse("d must be positive".into()));
        }
        let derived_mu = inst
            .support
            .iter()
            .map(|&i| inst.x_true[i].abs())
            .fold(f64::INFINITY, f64::min)
            / inst.d;
        if (derived_mu - inst.mu).abs() > 1e-9 {
            return Err(Error::Parse("stored mu disagrees with x_true".into()));
        }
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn base_cfg() -> GeneratorConfig {
        GeneratorConfig {
            n: 40,
            m: 25,
            k: 5,
            d: 1.0,
            magnitude_range: (0.5, 1.0),
            noise_inf_bound: 1e-3,
            rng_seed: 7,
            ensemble: Ensemble::GaussianInvM,
        }
    }

    /// Independent scalar-loop evaluation of both objectives; no linear
    /// algebra shared with the implementation.
    #[allow(clippy::needless_range_loop)]
    fn objectives_by_loops(inst: &ProblemInstance, x: &[f64], lambda: f64) -> (f64, f64) {
        let (m, n) = (inst.m(), inst.n());
        let mut resid_sq = 0.0;
        for i in 0..m {
            let mut dot = 0.0;
            for j in 0..n {
                dot += inst.a[(i, j)] * x[j];
            }
            let r = inst.y[i] - dot;
            resid_sq += r * r;
        }
        let mut l1 = 0.0;
        let mut l2_sq = 0.0;
        for &v in x {
            l1 += v.abs();
            l2_sq += v * v;
        }
        let mcps2 = 0.5 * resid_sq + lambda * (inst.d * l1 - 0.5 * l2_sq);
        let lasso = 0.5 * resid_sq + lambda * l1;
        (mcps2, lasso)
    }

    #[test]
    fn objectives_match_scalar_loop_oracle() {
        let inst = generate_instance(&base_cfg()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let x: Vec<f64> = (0..inst.n()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let xv = DVector::from_vec(x.clone());
            let lambda = rng.random_range(0.01..=0.5);
            let (want_m, want_l) = objectives_by_loops(&inst, &x, lambda);
            assert_relative_eq!(objective_mcps2(&inst, &xv, lambda), want_m, max_relative = 1e-12);
            assert_relative_eq!(objective_lasso(&inst, &xv, lambda), want_l, max_relative = 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let cfg = base_cfg();
        let a = generate_instance(&cfg).unwrap();
        let b = generate_instance(&cfg).unwrap();
        assert_eq!(a.a, b.a);
        assert_eq!(a.x_true, b.x_true);
        assert_eq!(a.eta, b.eta);
        assert_eq!(a.support, b.support);

        let mut other = cfg;
        other.rng_seed = 8;
        let c = generate_instance(&other).unwrap();
        assert_ne!(a.a, c.a);
    }

    #[test]
    fn generated_instance_invariants() {
        let cfg = base_cfg();
        let inst = generate_instance(&cfg).unwrap();
        assert_eq!(inst.support.len(), cfg.k);
        assert!(inst.support.windows(2).all(|w| w[0] < w[1]));
        assert!(inst.support.iter().all(|&i| i < cfg.n));

        let (lo, hi) = cfg.magnitude_range;
        let mut min_mag = f64::INFINITY;
        for i in 0..cfg.n {
            let v = inst.x_true[i].abs();
            if inst.support.binary_search(&i).is_ok() {
                assert!(v >= lo && v <= hi, "magnitude {v} outside [{lo}, {hi}]");
                min_mag = min_mag.min(v);
            } else {
                assert_eq!(inst.x_true[i], 0.0);
            }
        }
        assert_relative_eq!(inst.mu, min_mag / cfg.d, max_relative = 1e-15);

        let eta_inf = inst.eta.amax();
        assert!((eta_inf - cfg.noise_inf_bound).abs() <= 1e-12);

        // y really is A x + eta.
        let r = &inst.y - (&inst.a * &inst.x_true + &inst.eta);
        assert_eq!(r.amax(), 0.0);
    }

    #[test]
    fn noise_free_means_exact_measurements() {
        let mut cfg = base_cfg();
        cfg.noise_inf_bound = 0.0;
        let inst = generate_instance(&cfg).unwrap();
        assert!(inst.eta.iter().all(|&v| v == 0.0));
        assert_eq!((&inst.y - &inst.a * &inst.x_true).amax(), 0.0);
    }

    #[test]
    fn degenerate_magnitude_range_pins_mu_to_one() {
        let mut cfg = base_cfg();
        cfg.k = 1;
        cfg.magnitude_range = (1.0, 1.0);
        cfg.noise_inf_bound = 0.0;
        let inst = generate_instance(&cfg).unwrap();
        assert_eq!(inst.mu, 1.0);
        assert_eq!(inst.x_true[inst.support[0]].abs(), 1.0);
    }

    #[test]
    fn matrix_entries_have_inv_m_variance() {
        let mut cfg = base_cfg();
        cfg.n = 60;
        cfg.m = 50;
        let inst = generate_instance(&cfg).unwrap();
        let cnt = (cfg.m * cfg.n) as f64;
        let mean: f64 = inst.a.iter().sum::<f64>() / cnt;
        let var: f64 = inst.a.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / cnt;
        let want = 1.0 / cfg.m as f64;
        assert!(
            (var - want).abs() / want < 0.15,
            "sample variance {var} too far from {want}"
        );
    }

    #[test]
    fn config_validation_rejects_bad_shapes() {
        let ok = base_cfg();
        for (label, bad) in [
            ("k = 0", GeneratorConfig { k: 0, ..ok.clone() }),
            ("k > m", GeneratorConfig { k: 26, ..ok.clone() }),
            ("k > n", GeneratorConfig { k: 41, m: 45, ..ok.clone() }),
            ("lo > hi", GeneratorConfig { magnitude_range: (0.9, 0.5), ..ok.clone() }),
            ("hi > d", GeneratorConfig { magnitude_range: (0.5, 1.5), ..ok.clone() }),
            ("d <= 0", GeneratorConfig { d: 0.0, magnitude_range: (0.5, 0.9), ..ok.clone() }),
            ("negative noise", GeneratorConfig { noise_inf_bound: -1.0, ..ok.clone() }),
        ] {
            assert!(generate_instance(&bad).is_err(), "{label} should be rejected");
        }
        assert!(generate_instance(&ok).is_ok());
    }

    #[test]
    fn restriction_matches_entrywise_copy() {
        let inst = generate_instance(&base_cfg()).unwrap();
        let idx = [3usize, 0, 17, 17, 39];
        let sub = restrict_columns(&inst.a, &idx).unwrap();
        assert_eq!(sub.ncols(), idx.len());
        for (slot, &j) in idx.iter().enumerate() {
            for i in 0..inst.m() {
                assert_eq!(sub[(i, slot)], inst.a[(i, j)]);
            }
        }
        assert!(restrict_columns(&inst.a, &[40]).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let inst = generate_instance(&base_cfg()).unwrap();
        let text = inst.to_json().unwrap();
        let back = ProblemInstance::from_json(&text).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn json_rejects_inconsistent_support() {
        let inst = generate_instance(&base_cfg()).unwrap();
        let mut file: serde_json::Value = serde_json::from_str(&inst.to_json().unwrap()).unwrap();
        file["support"][0] = serde_json::json!(1usize + inst.support[0]);
        let text = serde_json::to_string(&file).unwrap();
        assert!(ProblemInstance::from_json(&text).is_err());
    }

    proptest! {
        /// mcps2 − lasso = λ(d−1)‖x‖₁ − (λ/2)‖x‖₂², for any x and λ.
        #[test]
        fn penalty_identity(seed in 0u64..1000, lambda in 0.001f64..2.0) {
            let mut cfg = base_cfg();
            cfg.rng_seed = seed;
            let inst = generate_instance(&cfg).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let x = DVector::from_fn(inst.n(), |_, _| rng.random_range(-1.0..=1.0));
            let l1: f64 = x.iter().map(|v: &f64| v.abs()).sum();
            let gap = objective_mcps2(&inst, &x, lambda) - objective_lasso(&inst, &x, lambda);
            let want = lambda * (inst.d - 1.0) * l1 - 0.5 * lambda * x.norm_squared();
            prop_assert!((gap - want).abs() <= 1e-9 * (1.0 + gap.abs()));
        }
    }
}
