#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use hedgefw::datagen::rng_from_seed;
use hedgefw::hedge::{HedgeState, WEIGHT_FLOOR};
use hedgefw::linalg::{dot, norm1};
use hedgefw::stochastic_fw::{lmo_vertex, predict, FwIterate, SufficientStats, FEASIBILITY_TOL};
use hedgefw::{CandidateGrid, FwConfig, HedgeConfig, HedgeFwOutput, Matrix, RegressionInstance};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rng_from_seed(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Gaussian design, dense uniform coefficients in [-1.5, 1.5], noise `sigma`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, p: usize, sigma: f64) -> RegressionInstance {
    let x: Vec<f64> = (0..n * p).map(|_| normal(rng)).collect();
    let beta: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let x = Matrix::new(n, p, x).unwrap();
    let y: Vec<f64> = x.matvec(&beta).iter().map(|v| v + sigma * normal(rng)).collect();
    RegressionInstance::new(x, y).unwrap()
}

/// `n x p` design with orthonormal columns (Gram-Schmidt) and a Gaussian
/// response.
pub fn orthonormal_instance(rng: &mut ChaCha8Rng, n: usize, p: usize) -> RegressionInstance {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    while cols.len() < p {
        let mut v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            cols.push(v.iter().map(|x| x / norm).collect());
        }
    }
    let mut x = Matrix::zeros(n, p);
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            x.set(i, j, *v);
        }
    }
    let y = (0..n).map(|_| normal(rng)).collect();
    RegressionInstance::new(x, y).unwrap()
}

pub fn penalized_objective(inst: &RegressionInstance, b: &[f64], lambda: f64) -> f64 {
    let r: Vec<f64> = inst.x().matvec(b).iter().zip(inst.y()).map(|(xb, y)| y - xb).collect();
    0.5 * dot(&r, &r) + lambda * norm1(b)
}

/// Exhaustive search of the penalized objective on nested cubic grids,
/// each one centred on the previous winner.
pub fn brute_force_lasso(inst: &RegressionInstance, lambda: f64, half_width: f64) -> Vec<f64> {
    let p = inst.p();
    let gram = inst.x().transpose();
    let xtx: Vec<Vec<f64>> = (0..p)
        .map(|a| (0..p).map(|b| dot(gram.row(a), gram.row(b))).collect())
        .collect();
    let xty = inst.x().t_matvec(inst.y());
    let yy = dot(inst.y(), inst.y());
    let f = |b: &[f64]| {
        let mut quad = 0.0;
        for a in 0..p {
            for c in 0..p {
                quad += b[a] * xtx[a][c] * b[c];
            }
        }
        0.5 * (quad - 2.0 * dot(&xty, b) + yy) + lambda * norm1(b)
    };

    let mut center = vec![0.0; p];
    let mut half = half_width;
    let points = 61usize;
    for _ in 0..6 {
        let step = 2.0 * half / (points - 1) as f64;
        let mut best = (f64::INFINITY, center.clone());
        let mut idx = vec![0usize; p];
        let mut b = vec![0.0; p];
        loop {
            for j in 0..p {
                b[j] = center[j] - half + step * idx[j] as f64;
            }
            let v = f(&b);
            if v < best.0 {
                best = (v, b.clone());
            }
            let mut k = 0;
            while k < p {
                idx[k] += 1;
                if idx[k] < points {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == p {
                break;
            }
        }
        center = best.1;
        half = 4.0 * step;
    }
    center
}

/// Largest violation of the LASSO optimality conditions, relative to
/// `max(1, ‖Xᵀy‖∞)`.
pub fn kkt_violation(inst: &RegressionInstance, b: &[f64], lambda: f64) -> f64 {
    let r: Vec<f64> = inst.x().matvec(b).iter().zip(inst.y()).map(|(xb, y)| y - xb).collect();
    let g = inst.x().t_matvec(&r);
    let scale = inst.x().t_matvec(inst.y()).iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for (gj, bj) in g.iter().zip(b) {
        let v = if *bj != 0.0 {
            (gj - lambda * bj.signum()).abs()
        } else {
            (gj.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst / scale
}

/// `(1/2n)‖y − Xb‖²` differentiated by central differences.
pub fn fd_gradient(inst: &RegressionInstance, b: &[f64], h: f64) -> Vec<f64> {
    let f = |b: &[f64]| {
        let n = inst.n() as f64;
        let r: Vec<f64> = inst.x().matvec(b).iter().zip(inst.y()).map(|(xb, y)| y - xb).collect();
        dot(&r, &r) / (2.0 * n)
    };
    (0..b.len())
        .map(|j| {
            let mut up = b.to_vec();
            let mut down = b.to_vec();
            up[j] += h;
            down[j] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// Final iterates, weights and cumulative losses.
pub type Replay = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>);

/// Replays the prequential loop step by step through the public building
/// blocks, checking every iterate's norm after every step. Returns the final
/// iterates, weights and cumulative losses.
pub fn replay_checking_feasibility(
    inst: &RegressionInstance,
    grid: &CandidateGrid,
    cfg: &HedgeConfig,
    fw: FwConfig,
) -> Result<Replay, String> {
    let p = inst.p();
    let mut stats = SufficientStats::new(p);
    let mut experts: Vec<FwIterate> = grid.radii().iter().map(|&r| FwIterate::new(p, r).unwrap()).collect();
    let mut hedge = HedgeState::new(grid.len()).unwrap();
    let mut cumulative = vec![0.0; grid.len()];
    let mut grad = vec![0.0; p];
    for i in 0..inst.n() {
        let (x, y) = inst.observation(i);
        let losses: Vec<f64> = experts
            .iter()
            .map(|e| {
                let d = y - predict(e.b(), x);
                let sq = d * d;
                cfg.loss_cap.map_or(sq, |c| sq.min(c))
            })
            .collect();
        stats.absorb(x, y).unwrap();
        for e in &mut experts {
            stats.gradient_into(e.b(), &mut grad).unwrap();
            e.step_toward(lmo_vertex(&grad, e.radius()).unwrap(), fw);
            let norm = norm1(e.b());
            if !(norm <= e.radius() + FEASIBILITY_TOL) {
                return Err(format!("radius {} reached norm {norm} at step {i}", e.radius()));
            }
        }
        for (c, l) in cumulative.iter_mut().zip(&losses) {
            *c += l;
        }
        hedge.apply(&losses, cfg.eta).unwrap();
    }
    Ok((
        experts.into_iter().map(FwIterate::into_b).collect(),
        hedge.weights().to_vec(),
        cumulative,
    ))
}

/// Checks `h_r ∝ exp(−eta L_r)` within `rel` relative error wherever the
/// weight is a normal double, and that weight order equals loss order.
pub fn hedge_loss_consistency(out: &HedgeFwOutput, rel: f64) -> Result<(), String> {
    let l = &out.cumulative_loss;
    let lw = &out.log_weights;
    let g = l.len();
    let best = (0..g).min_by(|&a, &b| l[a].total_cmp(&l[b])).unwrap();
    let log_norm = {
        let e: Vec<f64> = l.iter().map(|v| -out.eta * (v - l[best])).collect();
        let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + e.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    };
    let representable = f64::MIN_POSITIVE.ln();
    for r in 0..g {
        let expected_log = -out.eta * (l[r] - l[best]) - log_norm;
        if expected_log > representable || lw[r] > representable {
            let expected = expected_log.exp();
            let got = lw[r].exp();
            let err = ((got - expected) / expected).abs();
            if !(err <= rel) {
                return Err(format!("expert {r}: weight {got:e} vs {expected:e} (rel {err:e})"));
            }
            let exposed = got.max(WEIGHT_FLOOR);
            if (out.weights[r] - exposed).abs() > rel * exposed {
                return Err(format!(
                    "expert {r}: exposed weight {} vs exp(log) {got}",
                    out.weights[r]
                ));
            }
        }
    }
    for a in 0..g {
        for b in 0..g {
            if l[a] < l[b] && !(lw[a] > lw[b]) {
                return Err(format!(
                    "loss {} < {} but log-weight {} <= {}",
                    l[a], l[b], lw[a], lw[b]
                ));
            }
            if l[a] == l[b] && lw[a] != lw[b] {
                return Err(format!("equal losses {} but log-weights {} != {}", l[a], lw[a], lw[b]));
            }
        }
    }
    Ok(())
}
