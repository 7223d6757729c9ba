//! Online stochastic Frank-Wolfe for least squares over an l1 ball.
//!
//! The gradient of `f(b) = E[(y - <x, b>)^2] / 2` is estimated from running
//! averages of `x xᵀ` and `x y`; each step moves toward the l1-ball vertex
//! returned by the linear minimization oracle.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm1};
use crate::model::{FwConfig, RegressionInstance};

/// Slack allowed on `‖b‖₁ ≤ r` for floating-point rounding.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Running averages `alpha_bar = avg(x xᵀ)` and `beta_bar = avg(x y)`.
///
/// These do not depend on the radius, so one instance is shared by all
/// experts.
#[derive(Clone, Debug, PartialEq)]
pub struct SufficientStats {
    dim: usize,
    alpha_bar: Vec<f64>,
    beta_bar: Vec<f64>,
    count: usize,
}

impl SufficientStats {
    pub fn new(dim: usize) -> Self {
        SufficientStats {
            dim,
            alpha_bar: vec![0.0; dim * dim],
            beta_bar: vec![0.0; dim],
            count: 0,
        }
    }

    /// Stats over every observation of `instance`.
    pub fn from_instance(instance: &RegressionInstance) -> Result<Self> {
        let mut stats = SufficientStats::new(instance.p());
        for i in 0..instance.n() {
            let (x, y) = instance.observation(i);
            stats.absorb(x, y)?;
        }
        Ok(stats)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Row-major `dim × dim` buffer.
    pub fn alpha_bar(&self) -> &[f64] {
        &self.alpha_bar
    }

    pub fn alpha_row(&self, j: usize) -> &[f64] {
        &self.alpha_bar[j * self.dim..(j + 1) * self.dim]
    }

    pub fn beta_bar(&self) -> &[f64] {
        &self.beta_bar
    }

    /// Folds observation `(x_row, y)` into both averages with weight `1/i`.
    pub fn absorb(&mut self, x_row: &[f64], y: f64) -> Result<()> {
        if x_row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "observation row",
                expected: self.dim,
                found: x_row.len(),
            });
        }
        if let Some(j) = x_row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                what: "observation row",
                index: j,
            });
        }
        if !y.is_finite() {
            return Err(Error::NonFiniteValue {
                what: "observation response",
                index: 0,
            });
        }
        self.count += 1;
        let w = 1.0 / self.count as f64;
        let keep = 1.0 - w;
        let p = self.dim;
        // Upper triangle computed once and mirrored, so the matrix is
        // exactly symmetric.
        for j in 0..p {
            let xj = x_row[j];
            for k in j..p {
                let v = keep * self.alpha_bar[j * p + k] + w * (xj * x_row[k]);
                self.alpha_bar[j * p + k] = v;
                self.alpha_bar[k * p + j] = v;
            }
            self.beta_bar[j] = keep * self.beta_bar[j] + w * (xj * y);
        }
        Ok(())
    }

    /// `alpha_bar · b - beta_bar`.
    pub fn gradient(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.gradient_into(b, &mut out)?;
        Ok(out)
    }

    /// Writes the gradient estimate into `out`. Only the nonzero entries of
    /// `b` are visited, which matters because Frank-Wolfe iterates stay
    /// sparse.
    pub fn gradient_into(&self, b: &[f64], out: &mut [f64]) -> Result<()> {
        if self.count == 0 {
            return Err(Error::NoObservations);
        }
        if b.len() != self.dim || out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "gradient operand",
                expected: self.dim,
                found: b.len().min(out.len()),
            });
        }
        for (o, bb) in out.iter_mut().zip(&self.beta_bar) {
            *o = -bb;
        }
        for (k, &bk) in b.iter().enumerate() {
            if bk != 0.0 {
                axpy(bk, self.alpha_row(k), out);
            }
        }
        Ok(())
    }
}

/// A vertex `value · e_index` of the l1 ball, or the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub index: usize,
    pub value: f64,
}

/// Sparse form of the linear minimization oracle over `‖d‖₁ ≤ radius`.
///
/// Picks the smallest index attaining `max |g_j|` and returns
/// `-radius · sign(g_j) · e_j`; an all-zero gradient yields `None`.
pub fn lmo_vertex(gradient: &[f64], radius: f64) -> Result<Option<Vertex>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", format!("{radius} must be positive")));
    }
    let mut best: Option<(usize, f64)> = None;
    for (j, &g) in gradient.iter().enumerate() {
        if !g.is_finite() {
            return Err(Error::NonFiniteValue {
                what: "gradient",
                index: j,
            });
        }
        let a = g.abs();
        if best.is_none_or(|(_, m)| a > m) {
            best = Some((j, a));
        }
    }
    Ok(match best {
        Some((j, m)) if m > 0.0 => Some(Vertex {
            index: j,
            value: -radius * gradient[j].signum(),
        }),
        _ => None,
    })
}

/// Dense form of [`lmo_vertex`].
pub fn l1_lmo(gradient: &[f64], radius: f64) -> Result<Vec<f64>> {
    let mut d = vec![0.0; gradient.len()];
    if let Some(v) = lmo_vertex(gradient, radius)? {
        d[v.index] = v.value;
    }
    Ok(d)
}

/// `⟨x_row, b⟩`.
#[inline]
pub fn predict(b: &[f64], x_row: &[f64]) -> f64 {
    dot(b, x_row)
}

/// One learner's position inside its l1 ball.
#[derive(Clone, Debug, PartialEq)]
pub struct FwIterate {
    b: Vec<f64>,
    radius: f64,
    step_index: usize,
}

impl FwIterate {
    /// Starts at the origin.
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("radius", format!("{radius} must be positive")));
        }
        Ok(FwIterate {
            b: vec![0.0; dim],
            radius,
            step_index: 0,
        })
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn into_b(self) -> Vec<f64> {
        self.b
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn is_feasible(&self) -> bool {
        norm1(&self.b) <= self.radius + FEASIBILITY_TOL
    }

    /// Step size for the next step, `min(1, K / (t + K - 1))`.
    pub fn next_step_size(&self, k_step: f64) -> f64 {
        let t = (self.step_index + 1) as f64;
        (k_step / (t + k_step - 1.0)).min(1.0)
    }

    /// `b ← (1 - γ) b + γ d` for a dense direction inside the ball.
    pub fn step(&mut self, direction: &[f64], cfg: FwConfig) -> Result<()> {
        if direction.len() != self.b.len() {
            return Err(Error::DimensionMismatch {
                what: "direction",
                expected: self.b.len(),
                found: direction.len(),
            });
        }
        let norm = norm1(direction);
        if !(norm <= self.radius + FEASIBILITY_TOL) {
            return Err(Error::OutsideBall {
                norm,
                radius: self.radius,
            });
        }
        let gamma = self.next_step_size(cfg.k_step);
        for (bi, di) in self.b.iter_mut().zip(direction) {
            *bi = (1.0 - gamma) * *bi + gamma * di;
        }
        self.step_index += 1;
        debug_assert!(self.is_feasible(), "iterate left the l1 ball");
        Ok(())
    }

    /// Same update as [`FwIterate::step`] for a direction produced by the
    /// oracle, without materializing it.
    pub fn step_toward(&mut self, vertex: Option<Vertex>, cfg: FwConfig) {
        let gamma = self.next_step_size(cfg.k_step);
        let keep = 1.0 - gamma;
        for bi in &mut self.b {
            *bi *= keep;
        }
        if let Some(v) = vertex {
            debug_assert!(v.value.abs() <= self.radius);
            self.b[v.index] += gamma * v.value;
        }
        self.step_index += 1;
        debug_assert!(self.is_feasible(), "iterate left the l1 ball");
    }
}

/// `‖y - X b‖² / (2n)`, the objective the stochastic gradient estimates.
pub fn least_squares_objective(instance: &RegressionInstance, b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..instance.n() {
        let (x, y) = instance.observation(i);
        let r = y - dot(x, b);
        s += r * r;
    }
    s / (2.0 * instance.n() as f64)
}

/// Deterministic Frank-Wolfe over the whole batch: the stats are frozen at
/// `count = n` and `iterations` steps are taken from the origin.
pub fn batch_fw(instance: &RegressionInstance, radius: f64, cfg: FwConfig, iterations: usize) -> Result<FwIterate> {
    let stats = SufficientStats::from_instance(instance)?;
    let mut it = FwIterate::new(instance.p(), radius)?;
    let mut grad = vec![0.0; instance.p()];
    for _ in 0..iterations {
        stats.gradient_into(it.b(), &mut grad)?;
        let v = lmo_vertex(&grad, radius)?;
        it.step_toward(v, cfg);
    }
    Ok(it)
}
