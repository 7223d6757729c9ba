//! Shared domain types. Everything here is immutable once constructed and
//! validated on the way in.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Observed regression data `y = X b + noise`, with `X` stored one
/// observation per row.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionInstance {
    x: Matrix,
    y: Vec<f64>,
}

impl RegressionInstance {
    /// Validates and wraps a design matrix and response.
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        validate_instance(x, y)
    }

    /// Convenience constructor from row vectors.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], y: Vec<f64>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, y)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Observation `i` as the pair `(x_i, y_i)`.
    #[inline]
    pub fn observation(&self, i: usize) -> (&[f64], f64) {
        (self.x.row(i), self.y[i])
    }

    /// Sub-instance made of the given rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let x = self.x.select_rows(idx);
        let y = idx.iter().map(|&i| self.y[i]).collect();
        Self::new(x, y)
    }

    pub fn into_parts(self) -> (Matrix, Vec<f64>) {
        (self.x, self.y)
    }
}

/// Checks shape and finiteness; never coerces.
pub fn validate_instance(x: Matrix, y: Vec<f64>) -> Result<RegressionInstance> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Empty("design matrix"));
    }
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "response length",
            expected: x.rows(),
            found: y.len(),
        });
    }
    if let Some(k) = x.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEntry {
            what: "design matrix",
            row: k / x.cols(),
            col: k % x.cols(),
        });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue {
            what: "response",
            index: i,
        });
    }
    Ok(RegressionInstance { x, y })
}

/// The true coefficients behind a synthetic instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    beta: Vec<f64>,
    s0: usize,
    sigma: f64,
}

impl GroundTruth {
    pub fn new(beta: Vec<f64>, s0: usize, sigma: f64) -> Result<Self> {
        if let Some(i) = beta.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                what: "true coefficients",
                index: i,
            });
        }
        let nnz = beta.iter().filter(|v| **v != 0.0).count();
        if nnz != s0 {
            return Err(Error::invalid(
                "s0",
                format!("{s0} does not match the {nnz} nonzero coefficients"),
            ));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("{sigma} is not a nonnegative number")));
        }
        Ok(GroundTruth { beta, s0, sigma })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn s0(&self) -> usize {
        self.s0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn support(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Strictly increasing set of positive l1-ball radii, one per expert.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateGrid {
    radii: Vec<f64>,
}

impl CandidateGrid {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Empty("candidate grid"));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::invalid("candidate grid", format!("radius {r} is not positive")));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("candidate grid", "radii must be strictly increasing"));
        }
        Ok(CandidateGrid { radii })
    }

    /// Grid that skips the ordering check. Duplicates and arbitrary order are
    /// allowed; used to probe expert symmetry and permutation behaviour.
    pub fn unordered(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Empty("candidate grid"));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::invalid("candidate grid", format!("radius {r} is not positive")));
        }
        Ok(CandidateGrid { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Hedge settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HedgeConfig {
    /// Learning rate in `exp(-eta * loss)`.
    pub eta: f64,
    /// A weight vector whose largest entry is at least `1 - dirac_tolerance`
    /// counts as a Dirac.
    pub dirac_tolerance: f64,
    /// Optional cap applied to each squared error before it reaches Hedge.
    pub loss_cap: Option<f64>,
}

impl HedgeConfig {
    pub const DEFAULT_DIRAC_TOLERANCE: f64 = 0.01;

    pub fn new(eta: f64, dirac_tolerance: f64) -> Result<Self> {
        let cfg = HedgeConfig {
            eta,
            dirac_tolerance,
            loss_cap: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_loss_cap(mut self, cap: Option<f64>) -> Result<Self> {
        self.loss_cap = cap;
        self.validate()?;
        Ok(self)
    }

    /// `sqrt(8 ln G / n)`, the textbook rate for losses in `[0, 1]` over a
    /// known horizon. Falls back to 1 for a single expert where any rate is
    /// equivalent.
    pub fn tuned_eta(num_experts: usize, horizon: usize) -> f64 {
        if num_experts < 2 || horizon == 0 {
            return 1.0;
        }
        (8.0 * (num_experts as f64).ln() / horizon as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta", format!("{} must be positive", self.eta)));
        }
        check_dirac_tolerance(self.dirac_tolerance)?;
        if let Some(cap) = self.loss_cap {
            if !(cap > 0.0) {
                return Err(Error::invalid("loss_cap", format!("{cap} must be positive")));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_dirac_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid("dirac tolerance", format!("{tol} is outside (0, 0.5)")))
    }
}

/// Frank-Wolfe step schedule `gamma_t = K / (t + K - 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FwConfig {
    pub k_step: f64,
}

impl FwConfig {
    pub fn new(k_step: f64) -> Result<Self> {
        if !(k_step >= 1.0 && k_step.is_finite()) {
            return Err(Error::invalid("k_step", format!("{k_step} must be at least 1")));
        }
        Ok(FwConfig { k_step })
    }
}

impl Default for FwConfig {
    fn default() -> Self {
        FwConfig { k_step: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    HedgeFwAggregate,
    HedgeFwSelect,
    CvLasso,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::HedgeFwAggregate, Method::HedgeFwSelect, Method::CvLasso];

    pub fn label(self) -> &'static str {
        match self {
            Method::HedgeFwAggregate => "hedge_fw_aggregate",
            Method::HedgeFwSelect => "hedge_fw_select",
            Method::CvLasso => "cv_lasso",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::invalid("method", format!("unknown method `{s}`")))
    }
}

/// One (trial, method) outcome of a Monte Carlo sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub trial: usize,
    pub method: Method,
    pub pred_error: f64,
    pub resid_error: f64,
    pub est_error: f64,
    pub support_f1: f64,
    pub wall_time_s: f64,
    pub seed: u64,
    pub config_digest: String,
    /// Set when the trial failed; the numeric fields are then NaN.
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}
