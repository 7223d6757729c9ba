//! Batch LASSO baseline: cyclic coordinate descent on
//! `½‖y - Xb‖² + λ‖b‖₁`, a geometric λ path, and k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hedge_fw::{column_sq_norms, geometric};
use crate::linalg::{dot, norm1, norm_inf, Matrix};
use crate::model::RegressionInstance;

/// `sign(v) · max(|v| - threshold, 0)`.
#[inline]
pub fn soft_threshold(v: f64, threshold: f64) -> f64 {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdSettings {
    /// Stop once no coordinate moved by more than this in a sweep.
    pub tol: f64,
    /// Maximum number of full sweeps.
    pub max_iter: usize,
    /// Record the objective after every sweep.
    pub record_objective: bool,
}

impl Default for CdSettings {
    fn default() -> Self {
        CdSettings {
            tol: 1e-7,
            max_iter: 10_000,
            record_objective: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    /// False when `max_iter` ran out; `beta` is then the last iterate.
    pub converged: bool,
    pub sweeps: usize,
    pub objective_history: Option<Vec<f64>>,
}

/// `½‖y - Xb‖² + λ‖b‖₁`.
pub fn lasso_objective(instance: &RegressionInstance, b: &[f64], lambda: f64) -> f64 {
    let r: f64 = instance
        .x()
        .matvec(b)
        .iter()
        .zip(instance.y())
        .map(|(xb, y)| (y - xb) * (y - xb))
        .sum();
    0.5 * r + lambda * norm1(b)
}

/// Column-major copy of a design with its squared column norms, reused
/// across the λ path.
#[derive(Clone, Debug)]
pub struct LassoProblem {
    n: usize,
    p: usize,
    columns: Vec<f64>,
    sq_norms: Vec<f64>,
    y: Vec<f64>,
}

impl LassoProblem {
    pub fn new(instance: &RegressionInstance) -> Self {
        let t = instance.x().transpose();
        LassoProblem {
            n: instance.n(),
            p: instance.p(),
            sq_norms: column_sq_norms(instance.x()),
            columns: t.as_slice().to_vec(),
            y: instance.y().to_vec(),
        }
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.n..(j + 1) * self.n]
    }

    fn objective(&self, residual: &[f64], b: &[f64], lambda: f64) -> f64 {
        0.5 * dot(residual, residual) + lambda * norm1(b)
    }

    pub fn solve(&self, lambda: f64, warm_start: Option<&[f64]>, settings: &CdSettings) -> Result<LassoFit> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("{lambda} must be positive")));
        }
        if !(settings.tol > 0.0) || settings.max_iter == 0 {
            return Err(Error::invalid("solver settings", "tol and max_iter must be positive"));
        }
        let mut b = match warm_start {
            Some(w) if w.len() != self.p => {
                return Err(Error::DimensionMismatch {
                    what: "warm start",
                    expected: self.p,
                    found: w.len(),
                })
            }
            Some(w) => w.to_vec(),
            None => vec![0.0; self.p],
        };
        let mut residual = self.y.clone();
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0.0 {
                for (r, x) in residual.iter_mut().zip(self.column(j)) {
                    *r -= bj * x;
                }
            }
        }
        let mut history = settings
            .record_objective
            .then(|| vec![self.objective(&residual, &b, lambda)]);

        let mut converged = false;
        let mut sweeps = 0;
        while sweeps < settings.max_iter {
            sweeps += 1;
            let mut max_delta = 0.0f64;
            for j in 0..self.p {
                let sq = self.sq_norms[j];
                if sq == 0.0 {
                    b[j] = 0.0;
                    continue;
                }
                let col = self.column(j);
                let old = b[j];
                let rho = dot(col, &residual) + sq * old;
                let new = soft_threshold(rho, lambda) / sq;
                let delta = new - old;
                if delta != 0.0 {
                    for (r, x) in residual.iter_mut().zip(col) {
                        *r -= delta * x;
                    }
                    b[j] = new;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            if let Some(h) = history.as_mut() {
                h.push(self.objective(&residual, &b, lambda));
            }
            if max_delta < settings.tol {
                converged = true;
                break;
            }
        }
        Ok(LassoFit {
            beta: b,
            converged,
            sweeps,
            objective_history: history,
        })
    }
}

/// Solves the penalized problem at one λ by cyclic coordinate descent.
/// Zero columns keep a zero coefficient.
pub fn lasso_cd(
    instance: &RegressionInstance,
    lambda: f64,
    warm_start: Option<&[f64]>,
    settings: &CdSettings,
) -> Result<LassoFit> {
    LassoProblem::new(instance).solve(lambda, warm_start, settings)
}

/// Strictly decreasing positive penalties.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaGrid {
    lambdas: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Empty("lambda grid"));
        }
        if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::invalid("lambda grid", "penalties must be positive"));
        }
        if lambdas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("lambda grid", "penalties must be strictly decreasing"));
        }
        Ok(LambdaGrid { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// `‖Xᵀy‖∞`, the smallest penalty with an all-zero solution.
pub fn lambda_max(instance: &RegressionInstance) -> f64 {
    norm_inf(&instance.x().t_matvec(instance.y()))
}

/// `size` penalties from `λ_max` down to `λ_max · 10⁻³`, equally spaced in
/// log scale.
pub fn lambda_path(instance: &RegressionInstance, size: usize) -> Result<LambdaGrid> {
    if size < 2 {
        return Err(Error::invalid("lambda path size", format!("{size} must be at least 2")));
    }
    if instance.x().as_slice().iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateDesign);
    }
    let top = lambda_max(instance);
    if !(top > 0.0) {
        return Err(Error::invalid("lambda path", "response is orthogonal to every column"));
    }
    let mut l = geometric(top * 1e-3, top, size);
    l.reverse();
    LambdaGrid::new(l)
}

/// Seeded partition of `0..n` into `k` folds whose sizes differ by at most
/// one; the first `n % k` folds get the extra element.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::invalid(
            "fold count",
            format!("need 2 <= k <= n, got k={k}, n={n}"),
        ));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(perm[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvPoint {
    pub lambda: f64,
    /// NaN when no fold produced a converged fit.
    pub mean_mse: f64,
    /// Sample standard deviation of the per-fold validation MSEs.
    pub std_mse: f64,
    pub folds_used: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult {
    pub best_lambda: f64,
    pub curve: Vec<CvPoint>,
    /// Refit on every observation at `best_lambda`.
    pub final_beta: Vec<f64>,
    pub final_converged: bool,
    /// Fold fits that hit `max_iter` and were left out of the curve.
    pub nonconverged_fits: usize,
}

/// k-fold cross-validation over `grid` with default solver settings.
pub fn cv_lasso(instance: &RegressionInstance, grid: &LambdaGrid, k: usize, seed: u64) -> Result<CvResult> {
    cv_lasso_with(instance, grid, k, seed, &CdSettings::default())
}

pub fn cv_lasso_with(
    instance: &RegressionInstance,
    grid: &LambdaGrid,
    k: usize,
    seed: u64,
    settings: &CdSettings,
) -> Result<CvResult> {
    let folds = kfold_split(instance.n(), k, seed)?;
    let lambdas = grid.lambdas();
    let mut fold_mse: Vec<Vec<f64>> = vec![Vec::with_capacity(k); lambdas.len()];
    let mut nonconverged = 0;

    for (f, held_out) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let train = instance.select_rows(&train_idx)?;
        let problem = LassoProblem::new(&train);
        let mut warm: Option<Vec<f64>> = None;
        for (li, &lambda) in lambdas.iter().enumerate() {
            let fit = problem.solve(lambda, warm.as_deref(), settings)?;
            if fit.converged {
                fold_mse[li].push(validation_mse(instance.x(), instance.y(), held_out, &fit.beta));
            } else {
                nonconverged += 1;
            }
            warm = Some(fit.beta);
        }
    }

    let curve: Vec<CvPoint> = lambdas
        .iter()
        .zip(&fold_mse)
        .map(|(&lambda, mses)| {
            let m = mses.len();
            let mean = if m == 0 {
                f64::NAN
            } else {
                mses.iter().sum::<f64>() / m as f64
            };
            let std = if m < 2 {
                0.0
            } else {
                (mses.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64).sqrt()
            };
            CvPoint {
                lambda,
                mean_mse: mean,
                std_mse: std,
                folds_used: m,
            }
        })
        .collect();

    // Grid is decreasing, so a later point within the tie band has the
    // smaller λ.
    let mut best: Option<usize> = None;
    for (i, pt) in curve.iter().enumerate() {
        if !pt.mean_mse.is_finite() {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(b) if pt.mean_mse <= curve[b].mean_mse + 1e-12 => best = Some(i),
            _ => {}
        }
    }
    let best = best.ok_or_else(|| Error::invalid("cross-validation", "no penalty produced a converged fit"))?;
    let best_lambda = curve[best].lambda;
    let refit = lasso_cd(instance, best_lambda, None, settings)?;

    Ok(CvResult {
        best_lambda,
        curve,
        final_beta: refit.beta,
        final_converged: refit.converged,
        nonconverged_fits: nonconverged,
    })
}

fn validation_mse(x: &Matrix, y: &[f64], rows: &[usize], b: &[f64]) -> f64 {
    let s: f64 = rows
        .iter()
        .map(|&i| {
            let r = y[i] - dot(x.row(i), b);
            r * r
        })
        .sum();
    s / rows.len() as f64
}

/// The l1 radius at which the constrained problem shares this solution.
pub fn equivalent_radius(beta_hat: &[f64]) -> f64 {
    norm1(beta_hat)
}

/// Rescales every nonzero column to unit mean square. Returns the scaled
/// instance and the per-column scale; a coefficient `c_j` fitted on the
/// scaled design maps back as `c_j / scale_j`.
pub fn standardize_columns(instance: &RegressionInstance) -> Result<(RegressionInstance, Vec<f64>)> {
    let n = instance.n() as f64;
    let scales: Vec<f64> = column_sq_norms(instance.x())
        .into_iter()
        .map(|s| if s > 0.0 { (s / n).sqrt() } else { 1.0 })
        .collect();
    let p = instance.p();
    let mut data = instance.x().as_slice().to_vec();
    for (k, v) in data.iter_mut().enumerate() {
        *v /= scales[k % p];
    }
    let x = Matrix::new(instance.n(), p, data)?;
    Ok((RegressionInstance::new(x, instance.y().to_vec())?, scales))
}
