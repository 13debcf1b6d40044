//! Recovery-quality metrics for comparing an estimate to the planted signal.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::problem::ProblemInstance;
use crate::{Error, Result};

/// How well an estimate reproduces the planted support, signs, and values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryScore {
    /// Thresholded support equals the true support exactly.
    pub support_exact: bool,
    /// Support is exact and every sign on it matches the truth.
    pub signs_exact: bool,
    /// Off-support coordinates above the threshold, over n − k
    /// (zero when the support is the whole space).
    pub false_positive_rate: f64,
    /// True-support coordinates at or below the threshold, over k.
    pub false_negative_rate: f64,
    pub linf_error: f64,
    pub l2_error: f64,
}

/// Scores `x_hat` against the instance's planted signal. A coordinate counts
/// as selected when `|x_hat_i| > tau` (strictly, so `tau = 0` selects every
/// exact nonzero).
pub fn score_recovery(
    inst: &ProblemInstance,
    x_hat: &DVector<f64>,
    tau: f64,
) -> Result<RecoveryScore> {
    if x_hat.len() != inst.n() {
        return Err(Error::Config(format!(
            "estimate has length {}, instance has {} coordinates",
            x_hat.len(),
            inst.n()
        )));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Config("tau must be finite and nonnegative".into()));
    }
    if inst.k == 0 {
        return Err(Error::Config("instance has an empty support".into()));
    }

    let n = inst.n();
    let k = inst.k;
    let mut false_positives = 0usize;
    let mut false_negatives = 0usize;
    let mut signs_match = true;
    let mut on_support = vec![false; n];
    for &i in &inst.support {
        on_support[i] = true;
    }
    for i in 0..n {
        let selected = x_hat[i].abs() > tau;
        if on_support[i] {
            if !selected {
                false_negatives += 1;
            }
            if x_hat[i] * inst.x_true[i] <= 0.0 {
                signs_match = false;
            }
        } else if selected {
            false_positives += 1;
        }
    }

    let support_exact = false_positives == 0 && false_negatives == 0;
    let diff = x_hat - &inst.x_true;
    Ok(RecoveryScore {
        support_exact,
        signs_exact: support_exact && signs_match,
        false_positive_rate: if n == k {
            0.0
        } else {
            false_positives as f64 / (n - k) as f64
        },
        false_negative_rate: false_negatives as f64 / k as f64,
        linf_error: diff.amax(),
        l2_error: diff.norm(),
    })
}
