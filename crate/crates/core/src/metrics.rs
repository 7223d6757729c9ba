//! Error and timing metrics.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::model::{GroundTruth, RegressionInstance};

/// Coefficients with magnitude at or below this count as zero for support
/// recovery.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialMetrics {
    pub pred_error: f64,
    pub resid_error: f64,
    pub est_error: f64,
    pub support_f1: f64,
    pub wall_time_s: f64,
}

impl TrialMetrics {
    pub fn compute(
        instance: &RegressionInstance,
        truth: &GroundTruth,
        b_hat: &[f64],
        wall_time_s: f64,
    ) -> Result<Self> {
        Ok(TrialMetrics {
            pred_error: prediction_error(instance, truth, b_hat)?,
            resid_error: residual_error(instance, b_hat)?,
            est_error: estimation_error(truth, b_hat)?,
            support_f1: support_f1(truth, b_hat)?,
            wall_time_s,
        })
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected,
            found,
        })
    }
}

/// `‖X (b_hat - β)‖₂ / √n`, measured against the true signal.
pub fn prediction_error(instance: &RegressionInstance, truth: &GroundTruth, b_hat: &[f64]) -> Result<f64> {
    check_dim(instance.p(), b_hat.len())?;
    check_dim(instance.p(), truth.beta().len())?;
    let diff: Vec<f64> = b_hat.iter().zip(truth.beta()).map(|(a, b)| a - b).collect();
    Ok(norm2(&instance.x().matvec(&diff)) / (instance.n() as f64).sqrt())
}

/// `‖y - X b_hat‖₂ / √n`, against the noisy observations.
pub fn residual_error(instance: &RegressionInstance, b_hat: &[f64]) -> Result<f64> {
    check_dim(instance.p(), b_hat.len())?;
    let r: Vec<f64> = instance
        .x()
        .matvec(b_hat)
        .iter()
        .zip(instance.y())
        .map(|(xb, y)| y - xb)
        .collect();
    Ok(norm2(&r) / (instance.n() as f64).sqrt())
}

/// `‖b_hat - β‖₂`.
pub fn estimation_error(truth: &GroundTruth, b_hat: &[f64]) -> Result<f64> {
    check_dim(truth.beta().len(), b_hat.len())?;
    Ok(b_hat
        .iter()
        .zip(truth.beta())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// F1 score of the estimated support against the true one. Two empty
/// supports score 1.
pub fn support_f1(truth: &GroundTruth, b_hat: &[f64]) -> Result<f64> {
    check_dim(truth.beta().len(), b_hat.len())?;
    let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
    for (est, tru) in b_hat.iter().zip(truth.beta()) {
        match (est.abs() > SUPPORT_THRESHOLD, *tru != 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fnn += 1,
            (false, false) => {}
        }
    }
    if tp + fp + fnn == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fnn) as f64)
}

/// Runs `action` and returns its result with the elapsed monotonic wall
/// time in seconds.
pub fn time_block<T>(action: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = action();
    (out, start.elapsed().as_secs_f64())
}

/// Median, mean and interquartile range of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    pub q1: f64,
    pub q3: f64,
}

impl Summary {
    /// NaN entries are ignored. `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Summary> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Summary {
            count: v.len(),
            median: quantile(&v, 0.5),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            q1: quantile(&v, 0.25),
            q3: quantile(&v, 0.75),
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}
