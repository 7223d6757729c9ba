//! Multiplicative-weights (Hedge) over a fixed, finite set of experts.
//!
//! Weights are kept as normalized log-weights, so experts whose weight is far
//! below `f64::MIN_POSITIVE` still keep their relative order. The linear
//! weights handed out are floored at [`WEIGHT_FLOOR`].

use crate::error::{Error, Result};
use crate::model::check_dirac_tolerance;

/// Smallest value an exposed weight may take; no weight is ever reported as
/// exactly zero.
pub const WEIGHT_FLOOR: f64 = 1e-300;

/// Probability vector over experts plus the number of updates applied.
#[derive(Clone, Debug, PartialEq)]
pub struct HedgeState {
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    step_count: u64,
}

impl HedgeState {
    /// Uniform weights over `num_experts` experts.
    pub fn new(num_experts: usize) -> Result<Self> {
        if num_experts == 0 {
            return Err(Error::Empty("expert set"));
        }
        let w = 1.0 / num_experts as f64;
        Ok(HedgeState {
            log_weights: vec![w.ln(); num_experts],
            weights: vec![w; num_experts],
            step_count: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Natural logs of the normalized weights (log-sum-exp is 0).
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn num_experts(&self) -> usize {
        self.weights.len()
    }

    /// Returns the state after one exponential reweighting with `losses`.
    pub fn update(&self, losses: &[f64], eta: f64) -> Result<HedgeState> {
        let mut next = self.clone();
        next.apply(losses, eta)?;
        Ok(next)
    }

    /// In-place form of [`HedgeState::update`].
    ///
    /// Losses are shifted by their minimum before exponentiation; the
    /// normalized result is unchanged by any common shift.
    pub fn apply(&mut self, losses: &[f64], eta: f64) -> Result<()> {
        if losses.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                what: "hedge losses",
                expected: self.weights.len(),
                found: losses.len(),
            });
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid("eta", format!("{eta} must be positive")));
        }
        if let Some(i) = losses.iter().position(|l| !l.is_finite()) {
            return Err(Error::NonFiniteValue {
                what: "hedge losses",
                index: i,
            });
        }
        let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
        for (lw, &l) in self.log_weights.iter_mut().zip(losses) {
            *lw -= eta * (l - min);
        }
        self.normalize();
        self.step_count += 1;
        Ok(())
    }

    fn normalize(&mut self) {
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = self.log_weights.iter().map(|lw| (lw - max).exp()).sum();
        let shift = max + total.ln();
        for (lw, w) in self.log_weights.iter_mut().zip(&mut self.weights) {
            *lw -= shift;
            *w = lw.exp().max(WEIGHT_FLOOR);
        }
    }

    /// Index of the largest weight, smallest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.log_weights.iter().enumerate() {
            if w > self.log_weights[best] {
                best = i;
            }
        }
        best
    }

    /// The expert holding at least `1 - tolerance` of the mass, if any.
    pub fn dirac_index(&self, tolerance: f64) -> Result<Option<usize>> {
        check_dirac_tolerance(tolerance)?;
        let k = self.argmax();
        Ok((self.weights[k] >= 1.0 - tolerance).then_some(k))
    }

    /// Builds a state from explicit weights; they must be a probability
    /// vector.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("expert set"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid(
                "hedge weights",
                "entries must be finite and nonnegative",
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("hedge weights", format!("sum {sum} is not 1")));
        }
        let mut state = HedgeState {
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            weights,
            step_count: 0,
        };
        state.normalize();
        Ok(state)
    }
}
