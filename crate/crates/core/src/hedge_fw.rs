//! Hedge aggregation of one online Frank-Wolfe learner per candidate radius.
//!
//! A single pass over the observations. At step `i` every expert first
//! predicts `y_i` with its current iterate `b_r` (which has not seen
//! observation `i`), is charged the squared error, and then takes one
//! Frank-Wolfe step using the sufficient statistics that now include
//! observation `i`. The Hedge weights are renormalized once all experts have
//! been processed.

use crate::error::{Error, Result};
use crate::hedge::HedgeState;
use crate::linalg::{norm1, norm_inf, Matrix};
use crate::model::{CandidateGrid, FwConfig, HedgeConfig, RegressionInstance};
use crate::stochastic_fw::{lmo_vertex, predict, FwIterate, SufficientStats, FEASIBILITY_TOL};

/// In release builds the l1-ball feasibility of every iterate is checked on
/// every `FEASIBILITY_SAMPLE_EVERY`-th step (and the last one); debug builds
/// check every step.
pub const FEASIBILITY_SAMPLE_EVERY: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep per-step weights and losses.
    pub trace: bool,
}

/// Hedge weights after a step, and the losses that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub weights: Vec<f64>,
    pub losses: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HedgeFwOutput {
    pub radii: Vec<f64>,
    /// Final Hedge weights, one per radius.
    pub weights: Vec<f64>,
    /// Natural logs of the final weights, without the floor.
    pub log_weights: Vec<f64>,
    /// Final iterate of each expert.
    pub iterates: Vec<Vec<f64>>,
    /// Sum of the losses fed to Hedge, per expert.
    pub cumulative_loss: Vec<f64>,
    pub eta: f64,
    pub trace: Option<Vec<TraceStep>>,
}

/// Result of [`HedgeFwOutput::select`].
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub expert: usize,
    pub beta: Vec<f64>,
    /// Whether the weight vector was a Dirac at the requested tolerance; if
    /// not, `expert` is only the argmax.
    pub is_dirac: bool,
}

impl HedgeFwOutput {
    pub fn num_experts(&self) -> usize {
        self.weights.len()
    }

    /// `Σ_r h_r b_r`.
    pub fn aggregate(&self) -> Vec<f64> {
        let p = self.iterates.first().map_or(0, Vec::len);
        let mut out = vec![0.0; p];
        for (w, b) in self.weights.iter().zip(&self.iterates) {
            if *w == 1.0 {
                // exact copy for a full Dirac
                return b.clone();
            }
            for (o, v) in out.iter_mut().zip(b) {
                *o += w * v;
            }
        }
        out
    }

    /// The single expert Hedge settled on.
    pub fn select(&self, tolerance: f64) -> Result<Selection> {
        let state = HedgeState::from_weights(self.weights.clone())?;
        let dirac = state.dirac_index(tolerance)?;
        let expert = dirac.unwrap_or_else(|| state.argmax());
        Ok(Selection {
            expert,
            beta: self.iterates[expert].clone(),
            is_dirac: dirac.is_some(),
        })
    }
}

/// Runs the full single-pass procedure.
pub fn run_hedge_fw(
    instance: &RegressionInstance,
    grid: &CandidateGrid,
    hedge_cfg: &HedgeConfig,
    fw_cfg: &FwConfig,
) -> Result<HedgeFwOutput> {
    run_hedge_fw_with(instance, grid, hedge_cfg, fw_cfg, RunOptions::default())
}

pub fn run_hedge_fw_with(
    instance: &RegressionInstance,
    grid: &CandidateGrid,
    hedge_cfg: &HedgeConfig,
    fw_cfg: &FwConfig,
    opts: RunOptions,
) -> Result<HedgeFwOutput> {
    hedge_cfg.validate()?;
    FwConfig::new(fw_cfg.k_step)?;
    let n = instance.n();
    let p = instance.p();
    let g = grid.len();

    let mut hedge = HedgeState::new(g)?;
    let mut stats = SufficientStats::new(p);
    let mut experts = grid
        .radii()
        .iter()
        .map(|&r| FwIterate::new(p, r))
        .collect::<Result<Vec<_>>>()?;
    let mut losses = vec![0.0; g];
    let mut cumulative = vec![0.0; g];
    let mut grad = vec![0.0; p];
    let mut trace = opts.trace.then(|| Vec::with_capacity(n));

    for i in 0..n {
        let (x, y) = instance.observation(i);
        for (loss, expert) in losses.iter_mut().zip(&experts) {
            let e = y - predict(expert.b(), x);
            let sq = e * e;
            *loss = match hedge_cfg.loss_cap {
                Some(cap) => sq.min(cap),
                None => sq,
            };
        }
        stats
            .absorb(x, y)
            .map_err(|_| Error::NonFiniteObservation { index: i })?;
        for expert in &mut experts {
            stats.gradient_into(expert.b(), &mut grad)?;
            let v = lmo_vertex(&grad, expert.radius()).map_err(|_| Error::NonFiniteObservation { index: i })?;
            expert.step_toward(v, *fw_cfg);
        }
        if cfg!(debug_assertions) || i % FEASIBILITY_SAMPLE_EVERY == 0 || i + 1 == n {
            check_feasible(&experts, i)?;
        }
        for (c, l) in cumulative.iter_mut().zip(&losses) {
            *c += l;
        }
        hedge
            .apply(&losses, hedge_cfg.eta)
            .map_err(|_| Error::NonFiniteObservation { index: i })?;
        if let Some(t) = trace.as_mut() {
            t.push(TraceStep {
                weights: hedge.weights().to_vec(),
                losses: losses.clone(),
            });
        }
    }

    Ok(HedgeFwOutput {
        radii: grid.radii().to_vec(),
        weights: hedge.weights().to_vec(),
        log_weights: hedge.log_weights().to_vec(),
        iterates: experts.into_iter().map(FwIterate::into_b).collect(),
        cumulative_loss: cumulative,
        eta: hedge_cfg.eta,
        trace,
    })
}

fn check_feasible(experts: &[FwIterate], step: usize) -> Result<()> {
    for e in experts {
        let norm = norm1(e.b());
        if !(norm <= e.radius() + FEASIBILITY_TOL) {
            return Err(Error::InfeasibleIterate {
                radius: e.radius(),
                norm,
                step,
            });
        }
    }
    Ok(())
}

/// Geometric grid of `size` radii spanning three decades below
/// `r_max = ‖Xᵀy‖∞ / (min_j ‖X_j‖² / n)`.
pub fn default_grid(instance: &RegressionInstance, size: usize) -> Result<CandidateGrid> {
    if size < 2 {
        return Err(Error::invalid("grid size", format!("{size} must be at least 2")));
    }
    let x = instance.x();
    let n = instance.n() as f64;
    let xty = norm_inf(&x.t_matvec(instance.y()));
    let min_sq = column_sq_norms(x)
        .into_iter()
        .filter(|s| *s > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !min_sq.is_finite() {
        return Err(Error::DegenerateDesign);
    }
    let r_max = xty / (min_sq / n);
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::invalid("grid", "response is orthogonal to every column"));
    }
    CandidateGrid::new(geometric(r_max * 1e-3, r_max, size))
}

pub(crate) fn column_sq_norms(x: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for (o, v) in out.iter_mut().zip(x.row(i)) {
            *o += v * v;
        }
    }
    out
}

/// `size` points from `lo` to `hi` with equal ratios; endpoints are exact.
pub(crate) fn geometric(lo: f64, hi: f64, size: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (size - 1) as f64;
    (0..size)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == size - 1 {
                hi
            } else {
                lo * (ratio * k as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfgs(eta: f64) -> (HedgeConfig, FwConfig) {
        (HedgeConfig::new(eta, 0.01).unwrap(), FwConfig::new(2.0).unwrap())
    }

    #[test]
    fn one_observation_hand_trace() {
        let inst = RegressionInstance::from_rows(&[[1.0, 2.0]], vec![1.0]).unwrap();
        let grid = CandidateGrid::new(vec![1.0]).unwrap();
        let (h, f) = cfgs(0.5);
        let out = run_hedge_fw_with(&inst, &grid, &h, &f, RunOptions { trace: true }).unwrap();
        assert_eq!(out.weights, vec![1.0]);
        assert_eq!(out.iterates[0], vec![0.0, 1.0]);
        assert_eq!(out.cumulative_loss, vec![1.0]);
        assert_eq!(out.trace.unwrap()[0].losses, vec![1.0]);
    }

    #[test]
    fn single_expert_is_always_dirac() {
        let inst = RegressionInstance::from_rows(
            &[[1.0, -2.0, 0.5], [0.3, 0.1, 2.0], [-1.0, 1.0, 1.0]],
            vec![3.0, -1.0, 0.2],
        )
        .unwrap();
        let grid = CandidateGrid::new(vec![2.5]).unwrap();
        let (h, f) = cfgs(3.0);
        let out = run_hedge_fw(&inst, &grid, &h, &f).unwrap();
        assert_eq!(out.weights, vec![1.0]);
        assert_eq!(out.aggregate(), out.iterates[0]);
    }

    #[test]
    fn identical_experts_split_evenly() {
        let inst = RegressionInstance::from_rows(
            &[[1.0, -2.0], [0.3, 0.1], [-1.0, 1.0], [2.0, 2.0]],
            vec![3.0, -1.0, 0.2, 1.0],
        )
        .unwrap();
        let grid = CandidateGrid::unordered(vec![1.7, 1.7]).unwrap();
        let (h, f) = cfgs(0.8);
        let out = run_hedge_fw(&inst, &grid, &h, &f).unwrap();
        assert_eq!(out.weights, vec![0.5, 0.5]);
        assert_eq!(out.iterates[0], out.iterates[1]);
    }

    #[test]
    fn non_finite_loss_cap_rejected() {
        let inst = RegressionInstance::from_rows(&[[1.0]], vec![1.0]).unwrap();
        let grid = CandidateGrid::new(vec![1.0]).unwrap();
        let h = HedgeConfig {
            eta: 1.0,
            dirac_tolerance: 0.01,
            loss_cap: Some(-1.0),
        };
        assert!(run_hedge_fw(&inst, &grid, &h, &FwConfig::default()).is_err());
    }

    fn output(weights: Vec<f64>, iterates: Vec<Vec<f64>>) -> HedgeFwOutput {
        let g = weights.len();
        HedgeFwOutput {
            radii: vec![1.0; g],
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            weights,
            iterates,
            cumulative_loss: vec![0.0; g],
            eta: 1.0,
            trace: None,
        }
    }

    #[test]
    fn aggregate_examples() {
        let o = output(vec![0.0, 1.0], vec![vec![9.0, 9.0], vec![0.1, 0.7]]);
        assert_eq!(o.aggregate(), vec![0.1, 0.7]);
        let o = output(vec![0.5, 0.5], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(o.aggregate(), vec![0.5, 0.5]);
        let o = output(vec![0.25, 0.75], vec![vec![4.0, 0.0], vec![0.0, 4.0]]);
        assert_eq!(o.aggregate(), vec![1.0, 3.0]);
    }

    #[test]
    fn select_examples() {
        let it = vec![vec![1.0], vec![2.0]];
        let s = output(vec![0.999, 0.001], it.clone()).select(0.01).unwrap();
        assert_eq!((s.expert, s.is_dirac, s.beta.clone()), (0, true, vec![1.0]));
        let s = output(vec![0.6, 0.4], it.clone()).select(0.01).unwrap();
        assert_eq!((s.expert, s.is_dirac), (0, false));
        let s = output(vec![0.5, 0.5], it.clone()).select(0.01).unwrap();
        assert_eq!((s.expert, s.is_dirac), (0, false));
        let s = output(vec![0.3, 0.7], it).select(0.01).unwrap();
        assert_eq!((s.expert, s.is_dirac), (1, false));
    }

    #[test]
    fn grid_endpoints_and_spacing() {
        let inst = RegressionInstance::from_rows(&[[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]], vec![1.0, 4.0, -1.0]).unwrap();
        // Xᵀy = [0, 7]; column norms² = [2, 5]; r_max = 7 / (2 / 3)
        let r_max = 7.0 / (2.0 / 3.0);
        let g2 = default_grid(&inst, 2).unwrap();
        assert_eq!(g2.radii(), &[r_max * 1e-3, r_max]);
        let g4 = default_grid(&inst, 4).unwrap();
        for w in g4.radii().windows(2) {
            assert!((w[1] / w[0] - 10.0).abs() < 1e-9);
        }
        assert!(default_grid(&inst, 1).is_err());
    }

    #[test]
    fn zero_design_has_no_grid() {
        let inst = RegressionInstance::from_rows(&[[0.0, 0.0], [0.0, 0.0]], vec![1.0, 2.0]).unwrap();
        assert!(matches!(default_grid(&inst, 5), Err(Error::DegenerateDesign)));
    }
}
