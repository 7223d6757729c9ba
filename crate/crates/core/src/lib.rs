//! Hedge aggregation of online stochastic Frank-Wolfe learners for choosing
//! the l1 radius of a LASSO fit, with a cross-validated coordinate-descent
//! baseline and a seeded Monte Carlo harness comparing the two.
//!
//! The main entry point is [`hedge_fw::run_hedge_fw`]: each candidate radius
//! drives its own single-pass Frank-Wolfe learner, and Hedge weights the
//! learners by their prequential squared prediction error.

// NaN-rejecting comparisons and index loops over paired arrays are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baseline;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod hedge;
pub mod hedge_fw;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod stochastic_fw;

pub use error::{Error, Result};
pub use hedge_fw::{default_grid, run_hedge_fw, HedgeFwOutput, Selection};
pub use linalg::Matrix;
pub use model::{CandidateGrid, ExperimentRecord, FwConfig, GroundTruth, HedgeConfig, Method, RegressionInstance};
