//! Certificates for exact support recovery.
//!
//! Throughout, `S` is the ground-truth support, `A_S` the m×k submatrix of
//! its columns, `A_S̄` the complement, and `A_S† = (A_SᵀA_S)⁻¹A_Sᵀ` the
//! pseudoinverse of the (full-column-rank) support block. Two matrix norms
//! appear: `‖M‖_∞` = max absolute row sum, `‖M‖₁` = max absolute column sum.
//!
//! The certified quantities:
//!
//! * `irr_constant = ‖A_S†A_S̄‖₁` — irrepresentability of the off-support
//!   columns. The Lasso needs it below 1; the concave penalty only needs it
//!   below `1/(1−μ)` in the small-λ noise-free limit, which is the whole
//!   point of the estimator.
//! * Lasso sign condition `‖(A_SᵀA_S)⁻¹‖_∞(‖A_Sᵀη‖_∞ + λ) ≤ μd` and dual
//!   condition `irr + ‖ζ(η)‖_∞/λ < 1` with
//!   `ζ(η) = A_S̄ᵀ(A_SA_S† − I)η`; both together certify that the
//!   box-constrained Lasso recovers support and signs (strictness buys
//!   uniqueness).
//! * The MCPS² candidate minimizer
//!   `x*_S = x̃_S + (A_SᵀA_S − λI)⁻¹(λx̃_S − λd·sign(x̃_S) + A_Sᵀη)`, its
//!   sign-consistency bound, and the separation margin that certifies it to
//!   be a local (and, with restricted-eigenvalue information, near-global)
//!   minimizer.
//!
//! Every verdict in a [`CertificateReport`] is a pure function of the
//! report's numeric fields, so a serialized report can be re-audited without
//! the instance.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::problem::{restrict_columns, ProblemInstance};
use crate::{Error, Result};

/// Relative singular-value cutoff below which the support block counts as
/// rank-deficient.
const RANK_RTOL: f64 = 1e-10;

/// `‖M‖_∞`: max absolute row sum (0 for empty matrices).
pub(crate) fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum())
        .fold(0.0, f64::max)
}

/// `‖M‖₁`: max absolute column sum (0 for empty matrices).
pub(crate) fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum())
        .fold(0.0, f64::max)
}

fn amax_or_zero(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn validate_support(ncols: usize, support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::Config("support must be nonempty".into()));
    }
    if support.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("support must be strictly increasing".into()));
    }
    if *support.last().unwrap() >= ncols {
        return Err(Error::Config(format!(
            "support index {} out of range for {} columns",
            support.last().unwrap(),
            ncols
        )));
    }
    Ok(())
}

/// Per-instance quantities that do not depend on λ, computed once and shared
/// by every certificate. The pseudoinverse is applied through a QR
/// factorization of `A_S`; the explicit k×k inverse of the Gram block comes
/// from its Cholesky factor.
struct SupportView {
    k: usize,
    d: f64,
    mu: f64,
    /// A_SᵀA_S.
    gram: DMatrix<f64>,
    /// σ_min(A_SᵀA_S) = σ_min(A_S)².
    sigma_min_sq: f64,
    /// ‖A_S†A_S̄‖₁.
    irr: f64,
    /// ‖(A_SᵀA_S)⁻¹‖_∞.
    gram_inv_inf: f64,
    /// ‖A_Sᵀη‖_∞.
    support_noise_inf: f64,
    /// ‖A_S̄ᵀη‖_∞.
    offsupport_noise_inf: f64,
    /// ‖ζ(η)‖_∞ with ζ(η) = A_S̄ᵀ(A_SA_S† − I)η.
    zeta_inf: f64,
    /// x̃ restricted to S.
    x_true_s: DVector<f64>,
    /// A_Sᵀη.
    support_noise: DVector<f64>,
}

impl SupportView {
    fn new(inst: &ProblemInstance) -> Result<Self> {
        Self::for_matrix(&inst.a, &inst.support, Some(inst))
    }

    /// `inst` supplies noise and ground truth; pass `None` for norm-only use
    /// (then η-dependent fields are zero).
    fn for_matrix(
        a: &DMatrix<f64>,
        support: &[usize],
        inst: Option<&ProblemInstance>,
    ) -> Result<Self> {
        validate_support(a.ncols(), support)?;
        let k = support.len();
        let n = a.ncols();
        let a_s = restrict_columns(a, support)?;

        let singular = a_s.clone().singular_values();
        let sigma_max = singular.iter().fold(0.0f64, |acc, s| acc.max(*s));
        let sigma_min = singular.iter().fold(f64::INFINITY, |acc, s| acc.min(*s));
        if !(sigma_min > RANK_RTOL * sigma_max) || sigma_max == 0.0 {
            return Err(Error::RankDeficient {
                sigma_min,
                sigma_max,
            });
        }

        let complement: Vec<usize> = {
            let mut out = Vec::with_capacity(n - k);
            let mut s = support.iter().peekable();
            for j in 0..n {
                if s.peek() == Some(&&j) {
                    s.next();
                } else {
                    out.push(j);
                }
            }
            out
        };
        let a_sbar = restrict_columns(a, &complement)?;

        // Pseudoinverse applications through QR: A_S†B = R⁻¹(QᵀB).
        let qr = a_s.clone().qr();
        let q = qr.q();
        let r = qr.r();
        let pinv_apply = |b: &DMatrix<f64>| -> Result<DMatrix<f64>> {
            let qtb = q.tr_mul(b);
            r.solve_upper_triangular(&qtb).ok_or(Error::RankDeficient {
                sigma_min,
                sigma_max,
            })
        };

        let irr = if n == k {
            0.0
        } else {
            one_norm(&pinv_apply(&a_sbar)?)
        };

        let gram = a_s.tr_mul(&a_s);
        let gram_chol = Cholesky::new(gram.clone()).ok_or(Error::RankDeficient {
            sigma_min,
            sigma_max,
        })?;
        let gram_inv_inf = inf_norm(&gram_chol.inverse());

        let (support_noise, support_noise_inf, offsupport_noise_inf, zeta_inf, x_true_s) =
            match inst {
                Some(inst) => {
                    let sn = a_s.tr_mul(&inst.eta);
                    let sn_inf = amax_or_zero(&sn);
                    let (off_inf, z_inf) = if n == k {
                        (0.0, 0.0)
                    } else {
                        let off = a_sbar.tr_mul(&inst.eta);
                        // ζ(η) = A_S̄ᵀ(A_S A_S†η − η)
                        let proj = pinv_apply(&DMatrix::from_column_slice(
                            inst.eta.len(),
                            1,
                            inst.eta.as_slice(),
                        ))?;
                        let resid = &a_s * proj.column(0) - &inst.eta;
                        let zeta = a_sbar.tr_mul(&resid);
                        (amax_or_zero(&off), amax_or_zero(&zeta))
                    };
                    let xs = DVector::from_iterator(
                        k,
                        support.iter().map(|&i| inst.x_true[i]),
                    );
                    (sn, sn_inf, off_inf, z_inf, xs)
                }
                None => (
                    DVector::zeros(k),
                    0.0,
                    0.0,
                    0.0,
                    DVector::zeros(k),
                ),
            };

        let (d, mu) = match inst {
            Some(inst) => (inst.d, inst.mu),
            None => (1.0, 1.0),
        };

        Ok(SupportView {
            k,
            d,
            mu,
            gram,
            sigma_min_sq: sigma_min * sigma_min,
            irr,
            gram_inv_inf,
            support_noise_inf,
            offsupport_noise_inf,
            zeta_inf,
            x_true_s,
            support_noise,
        })
    }

    /// Cholesky of `A_SᵀA_S − λI`; requires λ < σ_min².
    fn shifted_cholesky(&self, lambda: f64) -> Result<Cholesky<f64, Dyn>> {
        if !(lambda > 0.0) {
            return Err(Error::Config("lambda must be positive".into()));
        }
        if lambda >= self.sigma_min_sq {
            return Err(Error::LambdaTooLarge {
                lambda,
                sigma_min_sq: self.sigma_min_sq,
            });
        }
        let mut g = self.gram.clone();
        for i in 0..self.k {
            g[(i, i)] -= lambda;
        }
        Cholesky::new(g).ok_or(Error::LambdaTooLarge {
            lambda,
            sigma_min_sq: self.sigma_min_sq,
        })
    }

    /// Left side of the sign-consistency bound:
    /// `‖(A_SᵀA_S − λI)⁻¹‖_∞ (λd(1−μ) + ‖A_Sᵀη‖_∞)`.
    fn sign_bound_lhs(&self, lambda: f64) -> Result<f64> {
        let inv = self.shifted_cholesky(lambda)?.inverse();
        Ok(inf_norm(&inv) * (lambda * self.d * (1.0 - self.mu) + self.support_noise_inf))
    }

    /// Separation margin
    /// `λd − irr·‖A_SᵀA_S(A_SᵀA_S−λI)⁻¹‖_∞(λd(1−μ)+‖A_Sᵀη‖_∞) − ‖A_S̄ᵀη‖_∞`,
    /// evaluated at the tightest admissible irrepresentability budget
    /// `ω = 1/irr`.
    fn margin(&self, lambda: f64) -> Result<f64> {
        let inv = self.shifted_cholesky(lambda)?.inverse();
        let amplification = inf_norm(&(&self.gram * &inv));
        Ok(lambda * self.d
            - self.irr
                * amplification
                * (lambda * self.d * (1.0 - self.mu) + self.support_noise_inf)
            - self.offsupport_noise_inf)
    }

    fn lasso_sign_lhs(&self, lambda: f64) -> f64 {
        self.gram_inv_inf * (self.support_noise_inf + lambda)
    }

    fn lasso_vsc_lhs(&self, lambda: f64) -> f64 {
        self.irr + self.zeta_inf / lambda
    }
}

/// `‖A_S†A_S̄‖₁`, the irrepresentability constant of the support.
pub fn irr_constant(a: &DMatrix<f64>, support: &[usize]) -> Result<f64> {
    Ok(SupportView::for_matrix(a, support, None)?.irr)
}

/// Outcome of the box-constrained Lasso support-recovery certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LassoVscCertificate {
    /// `‖(A_SᵀA_S)⁻¹‖_∞ (‖A_Sᵀη‖_∞ + λ)`, must stay ≤ μd.
    pub sign_lhs: f64,
    /// μd.
    pub sign_rhs: f64,
    pub irr: f64,
    /// `‖A_S̄ᵀ(A_SA_S† − I)η‖_∞`.
    pub zeta_inf: f64,
    /// `irr + zeta_inf/λ`, must stay strictly below 1.
    pub vsc_lhs: f64,
    pub sign_ok: bool,
    pub vsc_ok: bool,
    pub pass: bool,
}

/// Certifies exact support and sign recovery by the box-constrained Lasso at
/// the given λ (strict dual inequality, which also buys uniqueness).
pub fn lasso_vsc_certificate(inst: &ProblemInstance, lambda: f64) -> Result<LassoVscCertificate> {
    if !(lambda > 0.0) {
        return Err(Error::Config("lambda must be positive".into()));
    }
    let view = SupportView::new(inst)?;
    let sign_lhs = view.lasso_sign_lhs(lambda);
    let sign_rhs = view.mu * view.d;
    let vsc_lhs = view.lasso_vsc_lhs(lambda);
    let sign_ok = sign_lhs <= sign_rhs;
    let vsc_ok = vsc_lhs < 1.0;
    Ok(LassoVscCertificate {
        sign_lhs,
        sign_rhs,
        irr: view.irr,
        zeta_inf: view.zeta_inf,
        vsc_lhs,
        sign_ok,
        vsc_ok,
        pass: sign_ok && vsc_ok,
    })
}

/// First-order optimality audit for the box-constrained Lasso.
#[derive(Clone, Debug)]
pub struct KktReport {
    pub pass: bool,
    /// Worst `|A_iᵀ(Ax−y) + λ·sign(x_i)|` over interior nonzeros.
    pub worst_interior: f64,
    /// Worst `|A_iᵀ(Ax−y)| − λ` over zeros (positive = violation).
    pub worst_zero: f64,
    /// Worst normal-cone violation over coordinates clamped at ±d.
    pub worst_boundary: f64,
    /// Worst box exceedance `|x_i| − d` (positive = infeasible).
    pub worst_box: f64,
}

/// Checks the Lasso optimality system at `x` to tolerance `tol`:
/// interior nonzeros must satisfy stationarity, zeros must satisfy the dual
/// bound `|A_iᵀ(Ax−y)| ≤ λ`, and coordinates clamped at ±d are exempt from
/// stationarity but must push against the box (normal-cone sign).
pub fn kkt_check_lasso(
    x: &DVector<f64>,
    inst: &ProblemInstance,
    lambda: f64,
    tol: f64,
) -> KktReport {
    assert_eq!(x.len(), inst.n(), "kkt_check_lasso: x has wrong length");
    let g = inst.a.tr_mul(&(&inst.a * x - &inst.y));
    let d = inst.d;
    // Exact clamping is the normal outcome of projection; allow float fuzz.
    let at_bound = |v: f64| (v.abs() - d).abs() <= 1e-12 * d.max(1.0);

    let mut worst_interior = 0.0f64;
    let mut worst_zero = 0.0f64;
    let mut worst_boundary = 0.0f64;
    let mut worst_box = 0.0f64;
    for i in 0..x.len() {
        let xi = x[i];
        worst_box = worst_box.max(xi.abs() - d);
        if xi == 0.0 {
            worst_zero = worst_zero.max(g[i].abs() - lambda);
        } else if at_bound(xi) {
            // At +d the optimality condition relaxes to g_i + λ ≤ 0, at −d
            // to g_i − λ ≥ 0; violations are how far the wrong way it leans.
            let lean = if xi > 0.0 { g[i] + lambda } else { -(g[i] - lambda) };
            worst_boundary = worst_boundary.max(lean);
        } else {
            worst_interior = worst_interior.max((g[i] + lambda * xi.signum()).abs());
        }
    }
    let pass = worst_interior <= tol
        && worst_zero <= tol
        && worst_boundary <= tol
        && worst_box <= tol;
    KktReport {
        pass,
        worst_interior,
        worst_zero,
        worst_boundary,
        worst_box,
    }
}

/// The closed-form stationary candidate for MCPS² on the true support.
#[derive(Clone, Debug)]
pub struct CandidateMinimizer {
    /// Full n-vector; zero off support.
    pub x_star: DVector<f64>,
    /// sign(x*_i) = sign(x̃_i) for every i ∈ S.
    pub sign_consistent: bool,
    /// ‖x*‖_∞ ≤ d. Certificates fail closed when this is violated.
    pub within_box: bool,
}

/// `x*_S = x̃_S + (A_SᵀA_S − λI)⁻¹(λx̃_S − λd·sign(x̃_S) + A_Sᵀη)`, zero off
/// support. Requires λ < σ_min(A_SᵀA_S).
pub fn candidate_minimizer(inst: &ProblemInstance, lambda: f64) -> Result<CandidateMinimizer> {
    let view = SupportView::new(inst)?;
    candidate_from_view(inst, &view, lambda)
}

fn candidate_from_view(
    inst: &ProblemInstance,
    view: &SupportView,
    lambda: f64,
) -> Result<CandidateMinimizer> {
    let chol = view.shifted_cholesky(lambda)?;
    let signs = view.x_true_s.map(|v| v.signum());
    let rhs = &view.x_true_s * lambda - signs * (lambda * view.d) + &view.support_noise;
    let delta = chol.solve(&rhs);
    let x_star_s = &view.x_true_s + delta;

    let mut x_star = DVector::zeros(inst.n());
    let mut sign_consistent = true;
    for (slot, &i) in inst.support.iter().enumerate() {
        x_star[i] = x_star_s[slot];
        if x_star_s[slot] * view.x_true_s[slot] <= 0.0 {
            sign_consistent = false;
        }
    }
    let within_box = amax_or_zero(&x_star) <= inst.d;
    Ok(CandidateMinimizer {
        x_star,
        sign_consistent,
        within_box,
    })
}

/// Sufficient condition for the candidate to copy the true sign pattern.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SignBoundReport {
    /// `‖(A_SᵀA_S − λI)⁻¹‖_∞ (λd(1−μ) + ‖A_Sᵀη‖_∞)`.
    pub lhs: f64,
    /// μd.
    pub rhs: f64,
    pub pass: bool,
}

/// Checks `‖(A_SᵀA_S−λI)⁻¹‖_∞ (λd(1−μ) + ‖A_Sᵀη‖_∞) ≤ μd`, which forces
/// sign(x*) = sign(x̃) on the support. Requires λ < σ_min(A_SᵀA_S).
pub fn sign_bound_check(inst: &ProblemInstance, lambda: f64) -> Result<SignBoundReport> {
    let view = SupportView::new(inst)?;
    let lhs = view.sign_bound_lhs(lambda)?;
    let rhs = view.mu * view.d;
    Ok(SignBoundReport {
        lhs,
        rhs,
        pass: lhs <= rhs,
    })
}

/// Local-minimality certificate for the MCPS² candidate.
#[derive(Clone, Debug)]
pub struct LocalCertificate {
    pub lambda: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub irr: f64,
    pub sign_bound: SignBoundReport,
    pub candidate: CandidateMinimizer,
    /// `λd − irr·‖A_SᵀA_S(A_SᵀA_S−λI)⁻¹‖_∞(λd(1−μ)+‖A_Sᵀη‖_∞) − ‖A_S̄ᵀη‖_∞`.
    pub margin: f64,
    /// margin > 0: the vanishing-radius verdict, used by default.
    pub margin_positive: bool,
    /// margin > λ·ε·(1+α)/α: the strict verdict at perturbation radius ε.
    pub margin_strict: bool,
}

impl LocalCertificate {
    /// Default verdict: sign bound + positive margin + feasible candidate.
    pub fn pass(&self) -> bool {
        self.sign_bound.pass && self.margin_positive && self.candidate.within_box
    }

    /// Strict verdict at radius ε (used by the perturbation validation).
    pub fn pass_strict(&self) -> bool {
        self.sign_bound.pass && self.margin_strict && self.candidate.within_box
    }
}

/// Evaluates the local-minimality conditions at the tightest admissible
/// irrepresentability budget `ω = 1/irr_constant`. Requires
/// λ < σ_min(A_SᵀA_S); a failed sign bound makes the verdicts false but the
/// numbers are still reported.
pub fn mcps2_local_certificate(
    inst: &ProblemInstance,
    lambda: f64,
    epsilon: f64,
    alpha: f64,
) -> Result<LocalCertificate> {
    if !(epsilon > 0.0) || !(alpha > 0.0) {
        return Err(Error::Config("epsilon and alpha must be positive".into()));
    }
    let view = SupportView::new(inst)?;
    let sign_lhs = view.sign_bound_lhs(lambda)?;
    let sign_bound = SignBoundReport {
        lhs: sign_lhs,
        rhs: view.mu * view.d,
        pass: sign_lhs <= view.mu * view.d,
    };
    let margin = view.margin(lambda)?;
    let candidate = candidate_from_view(inst, &view, lambda)?;
    Ok(LocalCertificate {
        lambda,
        epsilon,
        alpha,
        irr: view.irr,
        sign_bound,
        candidate,
        margin,
        margin_positive: margin > 0.0,
        margin_strict: margin > lambda * epsilon * (1.0 + alpha) / alpha,
    })
}

/// Proximity-of-the-global-minimizer certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalCertificate {
    /// θ = `‖Aᵀ(y − Ax*)‖_∞`, the stationarity defect of the candidate.
    pub theta: f64,
    /// Cone opening the restricted-eigenvalue condition must cover:
    /// `(2λd + θ)/(λd − θ)`; +∞ when θ ≥ λd.
    #[serde(with = "ext_real")]
    pub alpha_required: f64,
    /// `2(θ + 2λd)√k/(φ − λ)`: every global minimizer lies within this
    /// ℓ2 radius of x*; +∞ when φ ≤ λ.
    #[serde(with = "ext_real")]
    pub radius: f64,
    pub phi: f64,
    pub epsilon: f64,
    pub within_box: bool,
    /// θ < λd, φ > λ, radius ≤ ε, and a feasible candidate.
    pub pass: bool,
}

/// Certifies that every global minimizer of the MCPS² objective lies within
/// ε of `x_star`, given a restricted-eigenvalue lower bound φ.
pub fn mcps2_global_certificate(
    inst: &ProblemInstance,
    lambda: f64,
    x_star: &DVector<f64>,
    phi: f64,
    epsilon: f64,
) -> Result<GlobalCertificate> {
    if !(lambda > 0.0) || !(epsilon > 0.0) {
        return Err(Error::Config("lambda and epsilon must be positive".into()));
    }
    if x_star.len() != inst.n() {
        return Err(Error::Config("x_star has wrong length".into()));
    }
    let theta = amax_or_zero(&inst.a.tr_mul(&(&inst.y - &inst.a * x_star)));
    let ld = lambda * inst.d;
    let alpha_required = if theta < ld {
        (2.0 * ld + theta) / (ld - theta)
    } else {
        f64::INFINITY
    };
    let radius = if phi > lambda {
        2.0 * (theta + 2.0 * ld) * (inst.k as f64).sqrt() / (phi - lambda)
    } else {
        f64::INFINITY
    };
    let within_box = amax_or_zero(x_star) <= inst.d;
    Ok(GlobalCertificate {
        theta,
        alpha_required,
        radius,
        phi,
        epsilon,
        within_box,
        pass: within_box && theta < ld && phi > lambda && radius <= epsilon,
    })
}

/// Exact-recovery certificate for the noise-free boundary case.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactRecoveryCertificate {
    /// ω = 1/irr_constant (+∞ for perfectly irrepresentable supports).
    #[serde(with = "ext_real")]
    pub omega: f64,
    /// Passing λ must stay strictly below `φ/(1 + 6√k·irr)`, the stable form
    /// of `ωφ/(6√k + ω)`.
    pub lambda_threshold: f64,
    /// Radius at which the global certificate then applies: `(2/3)dω`.
    #[serde(with = "ext_real")]
    pub epsilon_implied: f64,
    pub pass: bool,
    /// Which precondition or inequality failed, when `pass` is false.
    pub reason: Option<String>,
}

/// When η = 0 and every true magnitude sits at the box boundary (μ = 1), a
/// small enough λ makes x̃ itself the global minimizer. Requires those two
/// preconditions; fails with a reason otherwise.
pub fn exact_recovery_certificate(
    inst: &ProblemInstance,
    lambda: f64,
    phi: f64,
) -> Result<ExactRecoveryCertificate> {
    if !(lambda > 0.0) || !(phi > 0.0) {
        return Err(Error::Config("lambda and phi must be positive".into()));
    }
    let view = SupportView::new(inst)?;
    let omega = if view.irr == 0.0 {
        f64::INFINITY
    } else {
        1.0 / view.irr
    };
    let threshold = phi / (1.0 + 6.0 * (inst.k as f64).sqrt() * view.irr);
    let epsilon_implied = 2.0 / 3.0 * inst.d * omega;
    let mut reason = None;
    if (inst.mu - 1.0).abs() > 1e-12 {
        reason = Some(format!("requires mu = 1, instance has mu = {}", inst.mu));
    } else if amax_or_zero(&inst.eta) > 0.0 {
        reason = Some("requires a noise-free instance".into());
    } else if !(lambda < threshold) {
        reason = Some(format!(
            "lambda = {lambda} is not below the threshold {threshold}"
        ));
    } else if !(phi > lambda) {
        reason = Some(format!("phi = {phi} does not exceed lambda = {lambda}"));
    }
    Ok(ExactRecoveryCertificate {
        omega,
        lambda_threshold: threshold,
        epsilon_implied,
        pass: reason.is_none(),
        reason,
    })
}

/// Membership in the cone `C(α, S) = {v : ‖v_S̄‖₁ ≤ α‖v_S‖₁}`.
pub fn cone_membership(v: &DVector<f64>, support: &[usize], alpha: f64) -> bool {
    let mut on = 0.0;
    let mut off = 0.0;
    let mut s = support.iter().peekable();
    for i in 0..v.len() {
        if s.peek() == Some(&&i) {
            s.next();
            on += v[i].abs();
        } else {
            off += v[i].abs();
        }
    }
    off <= alpha * on
}

/// Sampling estimator for the restricted eigenvalue
/// `min_{v ∈ C(α,S)\{0}} ‖Av‖₂²/‖v‖₂²`.
///
/// Draws `v_S` standard normal and `v_S̄` standard normal rescaled so that
/// `‖v_S̄‖₁ = u·α‖v_S‖₁` with `u ~ U[0,1]`, then takes the minimum sampled
/// quotient. The exact constant is NP-hard; this is an upper-bound heuristic
/// and reports flag it as such.
pub fn re_estimate(
    a: &DMatrix<f64>,
    support: &[usize],
    alpha: f64,
    samples: usize,
    rng_seed: u64,
) -> Result<f64> {
    validate_support(a.ncols(), support)?;
    if !(alpha > 0.0) {
        return Err(Error::Config("alpha must be positive".into()));
    }
    if samples == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    let n = a.ncols();
    let k = support.len();
    let complement: Vec<usize> = {
        let mut out = Vec::with_capacity(n - k);
        let mut s = support.iter().peekable();
        for j in 0..n {
            if s.peek() == Some(&&j) {
                s.next();
            } else {
                out.push(j);
            }
        }
        out
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best = f64::INFINITY;
    let mut v = DVector::zeros(n);
    for _ in 0..samples {
        v.fill(0.0);
        let mut on_l1 = 0.0;
        for &i in support {
            let g: f64 = StandardNormal.sample(&mut rng);
            v[i] = g;
            on_l1 += g.abs();
        }
        if on_l1 == 0.0 {
            continue;
        }
        if !complement.is_empty() {
            let mut off_l1 = 0.0;
            for &j in &complement {
                let g: f64 = StandardNormal.sample(&mut rng);
                v[j] = g;
                off_l1 += g.abs();
            }
            let u: f64 = rng.random_range(0.0..=1.0);
            let target = u * alpha * on_l1;
            if off_l1 > 0.0 {
                let s = target / off_l1;
                for &j in &complement {
                    v[j] *= s;
                }
            }
        }
        let quotient = (a * &v).norm_squared() / v.norm_squared();
        best = best.min(quotient);
    }
    if best.is_infinite() {
        return Err(Error::Solver("restricted-eigenvalue sampling degenerated".into()));
    }
    Ok(best)
}

/// Which certificate family a λ-sweep should evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertFamily {
    /// Sign + dual conditions of the box-constrained Lasso.
    Lasso,
    /// Sign bound + positive separation margin of MCPS².
    Mcps2,
}

/// Evaluates the family's full certificate at every grid point. Grid must be
/// positive and strictly ascending. Points where the certificate cannot be
/// evaluated (λ ≥ σ_min² for MCPS²) count as failing.
pub fn lambda_feasible_range(
    inst: &ProblemInstance,
    family: CertFamily,
    grid: &[f64],
) -> Result<Vec<(f64, bool)>> {
    if grid.is_empty() {
        return Err(Error::Config("lambda grid must be nonempty".into()));
    }
    if !(grid[0] > 0.0) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "lambda grid must be positive and strictly ascending".into(),
        ));
    }
    let view = SupportView::new(inst)?;
    let mut out = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let pass = match family {
            CertFamily::Lasso => {
                view.lasso_sign_lhs(lambda) <= view.mu * view.d
                    && view.lasso_vsc_lhs(lambda) < 1.0
            }
            CertFamily::Mcps2 => {
                if lambda >= view.sigma_min_sq {
                    false
                } else {
                    // A borderline λ can defeat the shifted Cholesky even
                    // below σ_min²; such points certify nothing.
                    match (view.sign_bound_lhs(lambda), view.margin(lambda)) {
                        (Ok(lhs), Ok(margin)) => lhs <= view.mu * view.d && margin > 0.0,
                        _ => false,
                    }
                }
            }
        };
        out.push((lambda, pass));
    }
    Ok(out)
}

/// Shared knobs for certificates and solvers. `rho > lambda` keeps the ADMM
/// x-update positive definite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda: f64,
    pub rho: f64,
    /// Perturbation radius for the strict margin and global certificates.
    pub epsilon: f64,
    /// Cone opening for the restricted-eigenvalue estimator.
    pub alpha: f64,
    pub re_samples: usize,
    pub re_seed: u64,
    pub lambda_grid: Vec<f64>,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
}

impl Hyperparams {
    /// Defaults for an n-dimensional instance: ρ = max(1, 10λ), residual
    /// tolerances 1e-8·√n, 10⁴ iteration cap, α = 3, log-spaced λ grid.
    pub fn new(lambda: f64, n: usize) -> Self {
        let tol = 1e-8 * (n as f64).sqrt();
        Hyperparams {
            lambda,
            rho: 1.0f64.max(10.0 * lambda),
            epsilon: 0.01,
            alpha: 3.0,
            re_samples: 2000,
            re_seed: 0,
            lambda_grid: default_lambda_grid(),
            max_iters: 10_000,
            tol_primal: tol,
            tol_dual: tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::Config("lambda must be positive".into()));
        }
        if !(self.rho > self.lambda) {
            return Err(Error::Config(format!(
                "rho = {} must exceed lambda = {}",
                self.rho, self.lambda
            )));
        }
        if !(self.epsilon > 0.0) || !(self.alpha > 0.0) {
            return Err(Error::Config("epsilon and alpha must be positive".into()));
        }
        if self.re_samples == 0 || self.max_iters == 0 {
            return Err(Error::Config("re_samples and max_iters must be positive".into()));
        }
        if !(self.tol_primal > 0.0) || !(self.tol_dual > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !self.lambda_grid.is_empty()
            && (!(self.lambda_grid[0] > 0.0)
                || self.lambda_grid.windows(2).any(|w| w[0] >= w[1]))
        {
            return Err(Error::Config(
                "lambda grid must be positive and strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

/// 25 log-spaced points on [1e-6, 1].
pub fn default_lambda_grid() -> Vec<f64> {
    (0..25)
        .map(|i| 10f64.powf(-6.0 + 6.0 * i as f64 / 24.0))
        .collect()
}

/// Where the restricted-eigenvalue value in a report came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiSource {
    /// Sampling upper-bound heuristic.
    Estimated { samples: usize, seed: u64 },
    UserSupplied,
}

/// All verdicts of a full certificate run. Each is a pure function of the
/// numeric fields of [`CertificateReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    /// Lasso sign + dual conditions.
    pub lasso_vsc: bool,
    /// Candidate sign-consistency bound.
    pub sign_bound: bool,
    /// Separation margin > 0 (vanishing-radius default).
    pub margin: bool,
    /// Separation margin > λε(1+α)/α.
    pub margin_strict: bool,
    /// Global-minimizer proximity within ε.
    pub global: bool,
    /// Noise-free μ=1 exact recovery.
    pub exact_recovery: bool,
}

/// One serializable audit of every certificate at a single λ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateReport {
    pub format: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub d: f64,
    pub mu: f64,
    pub eta_inf: f64,
    pub lambda_used: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub irr_constant: f64,
    /// 1/irr_constant; +∞ when the off-support columns are perfectly
    /// irrepresentable.
    #[serde(with = "ext_real")]
    pub omega_max: f64,
    pub lasso_sign_lhs: f64,
    pub lasso_vsc_lhs: f64,
    pub zeta_inf: f64,
    pub sign_bound_lhs: f64,
    pub margin: f64,
    pub theta: f64,
    #[serde(with = "ext_real")]
    pub alpha_required: f64,
    #[serde(with = "ext_real")]
    pub global_radius: f64,
    pub phi_estimate: f64,
    pub phi_source: PhiSource,
    pub exact_recovery_lambda_threshold: f64,
    pub sign_consistent: bool,
    pub candidate_within_box: bool,
    pub verdicts: Verdicts,
}

const REPORT_FORMAT: &str = "mcps2/certificate/v1";

impl CertificateReport {
    /// Recomputes every verdict from the numeric fields alone; must agree
    /// with the stored block.
    pub fn recompute_verdicts(&self) -> Verdicts {
        let mu_d = self.mu * self.d;
        let ld = self.lambda_used * self.d;
        Verdicts {
            lasso_vsc: self.lasso_sign_lhs <= mu_d && self.lasso_vsc_lhs < 1.0,
            sign_bound: self.sign_bound_lhs <= mu_d,
            margin: self.margin > 0.0,
            margin_strict: self.margin
                > self.lambda_used * self.epsilon * (1.0 + self.alpha) / self.alpha,
            global: self.candidate_within_box
                && self.theta < ld
                && self.phi_estimate > self.lambda_used
                && self.global_radius <= self.epsilon,
            exact_recovery: (self.mu - 1.0).abs() <= 1e-12
                && self.eta_inf == 0.0
                && self.lambda_used < self.exact_recovery_lambda_threshold
                && self.phi_estimate > self.lambda_used,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: CertificateReport = serde_json::from_str(text)?;
        if report.format != REPORT_FORMAT {
            return Err(Error::Parse(format!(
                "unknown certificate format {:?}",
                report.format
            )));
        }
        Ok(report)
    }
}

/// Runs the whole certificate battery at `hp.lambda` and assembles the
/// report. φ comes from the sampling estimator unless overridden.
pub fn certify_instance(
    inst: &ProblemInstance,
    hp: &Hyperparams,
    phi_override: Option<f64>,
) -> Result<CertificateReport> {
    hp.validate()?;
    if let Some(phi) = phi_override {
        if !(phi > 0.0) {
            return Err(Error::Config("phi override must be positive".into()));
        }
    }
    let lasso = lasso_vsc_certificate(inst, hp.lambda)?;
    let local = mcps2_local_certificate(inst, hp.lambda, hp.epsilon, hp.alpha)?;
    let (phi, phi_source) = match phi_override {
        Some(phi) => (phi, PhiSource::UserSupplied),
        None => (
            re_estimate(&inst.a, &inst.support, hp.alpha, hp.re_samples, hp.re_seed)?,
            PhiSource::Estimated {
                samples: hp.re_samples,
                seed: hp.re_seed,
            },
        ),
    };
    let global = mcps2_global_certificate(inst, hp.lambda, &local.candidate.x_star, phi, hp.epsilon)?;
    let exact = exact_recovery_certificate(inst, hp.lambda, phi)?;

    let report = CertificateReport {
        format: REPORT_FORMAT.to_string(),
        n: inst.n(),
        m: inst.m(),
        k: inst.k,
        d: inst.d,
        mu: inst.mu,
        eta_inf: amax_or_zero(&inst.eta),
        lambda_used: hp.lambda,
        epsilon: hp.epsilon,
        alpha: hp.alpha,
        irr_constant: local.irr,
        omega_max: if local.irr == 0.0 {
            f64::INFINITY
        } else {
            1.0 / local.irr
        },
        lasso_sign_lhs: lasso.sign_lhs,
        lasso_vsc_lhs: lasso.vsc_lhs,
        zeta_inf: lasso.zeta_inf,
        sign_bound_lhs: local.sign_bound.lhs,
        margin: local.margin,
        theta: global.theta,
        alpha_required: global.alpha_required,
        global_radius: global.radius,
        phi_estimate: phi,
        phi_source,
        exact_recovery_lambda_threshold: exact.lambda_threshold,
        sign_consistent: local.candidate.sign_consistent,
        candidate_within_box: local.candidate.within_box,
        verdicts: Verdicts {
            lasso_vsc: lasso.pass,
            sign_bound: local.sign_bound.pass,
            margin: local.margin_positive,
            margin_strict: local.margin_strict,
            global: global.pass,
            exact_recovery: exact.pass,
        },
    };
    debug_assert_eq!(report.verdicts, report.recompute_verdicts());
    Ok(report)
}

/// Serde adapter for extended reals: finite values stay numbers, ±∞ become
/// the strings "inf"/"-inf" (bare JSON has no Infinity literal).
mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Word(w) => match w.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\" or \"-inf\", got {other:?}"
                ))),
            },
        }
    }
}
