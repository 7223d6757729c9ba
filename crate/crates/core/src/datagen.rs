//! Seeded synthetic sparse-regression instances.
//!
//! Every instance is a pure function of its [`SyntheticSpec`]. The generator
//! is ChaCha8 seeded with `seed_from_u64(spec.seed)`, and draws happen in a
//! fixed order: support positions, signs and magnitudes of the signal, the
//! design matrix row by row, then the noise. Monte Carlo trial `t` of a
//! sweep with master seed `m` uses `child_seed(m, t)` as its own seed, so
//! trials share no generator state.

use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::model::{GroundTruth, RegressionInstance};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Design {
    /// Entries i.i.d. N(0, 1).
    GaussianIid,
    /// Rows i.i.d. N(0, Σ) with `Σ_jk = rho^|j-k|`.
    ToeplitzCorrelated { rho: f64 },
}

impl Design {
    pub fn name(&self) -> &'static str {
        match self {
            Design::GaussianIid => "gaussian_iid",
            Design::ToeplitzCorrelated { .. } => "toeplitz_correlated",
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub s0: usize,
    pub sigma: f64,
    pub design: Design,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::invalid("spec", "n and p must be positive"));
        }
        if self.s0 > self.p {
            return Err(Error::invalid("s0", format!("{} exceeds p = {}", self.s0, self.p)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("{} is not a nonnegative number", self.sigma),
            ));
        }
        if let Design::ToeplitzCorrelated { rho } = self.design {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::invalid("rho", format!("{rho} is outside [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` in a sweep with master seed `master`:
/// `mix64(master + (trial + 1) · 0x9e3779b97f4a7c15)` (wrapping).
pub fn child_seed(master: u64, trial: u64) -> u64 {
    mix64(master.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `s0`-sparse signal: uniform support, each value `±(1 + G)` with a fair
/// sign and `G ~ N(0, 1)`. An exact-zero value is redrawn.
pub fn gen_signal<R: Rng + ?Sized>(p: usize, s0: usize, rng: &mut R) -> Result<Vec<f64>> {
    if s0 > p {
        return Err(Error::invalid("s0", format!("{s0} exceeds p = {p}")));
    }
    let mut beta = vec![0.0; p];
    for j in index::sample(rng, p, s0) {
        beta[j] = loop {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let g: f64 = rng.sample(StandardNormal);
            let v = sign * (1.0 + g);
            if v != 0.0 {
                break v;
            }
        };
    }
    Ok(beta)
}

/// Draws `(X, y = Xβ + σ g)` and the truth behind it.
pub fn gen_instance(spec: &SyntheticSpec) -> Result<(RegressionInstance, GroundTruth)> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let beta = gen_signal(spec.p, spec.s0, &mut rng)?;
    let x = match spec.design {
        Design::GaussianIid => {
            let data = (0..spec.n * spec.p).map(|_| rng.sample(StandardNormal)).collect();
            Matrix::new(spec.n, spec.p, data)?
        }
        Design::ToeplitzCorrelated { rho } => {
            let chol = toeplitz_covariance(spec.p, rho).cholesky()?;
            let mut data = Vec::with_capacity(spec.n * spec.p);
            let mut z = vec![0.0; spec.p];
            for _ in 0..spec.n {
                for zj in &mut z {
                    *zj = rng.sample(StandardNormal);
                }
                for j in 0..spec.p {
                    data.push(dot(&chol.row(j)[..=j], &z[..=j]));
                }
            }
            Matrix::new(spec.n, spec.p, data)?
        }
    };
    let y = (0..spec.n)
        .map(|i| {
            let g: f64 = rng.sample(StandardNormal);
            dot(x.row(i), &beta) + spec.sigma * g
        })
        .collect();
    let truth = GroundTruth::new(beta, spec.s0, spec.sigma)?;
    Ok((RegressionInstance::new(x, y)?, truth))
}

/// `Σ_jk = rho^|j-k|`.
pub fn toeplitz_covariance(p: usize, rho: f64) -> Matrix {
    let mut s = Matrix::zeros(p, p);
    for j in 0..p {
        for k in 0..p {
            s.set(j, k, rho.powi(j.abs_diff(k) as i32));
        }
    }
    s
}

/// Contents of an instance file.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub instance: RegressionInstance,
    pub truth: GroundTruth,
    pub seed: u64,
}

fn write_row<W: Write>(w: &mut W, row: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            w.write_all(b" ")?;
        }
        // Debug prints the shortest representation that parses back exactly.
        write!(w, "{v:?}")?;
        first = false;
    }
    w.write_all(b"\n")
}

/// Writes `n p s0 sigma seed`, then the rows of X, then y, then β; one line
/// each, space separated.
pub fn write_instance<W: Write>(
    w: &mut W,
    instance: &RegressionInstance,
    truth: &GroundTruth,
    seed: u64,
) -> Result<()> {
    if truth.beta().len() != instance.p() {
        return Err(Error::DimensionMismatch {
            what: "true coefficients",
            expected: instance.p(),
            found: truth.beta().len(),
        });
    }
    writeln!(
        w,
        "{} {} {} {:?} {}",
        instance.n(),
        instance.p(),
        truth.s0(),
        truth.sigma(),
        seed
    )?;
    for i in 0..instance.n() {
        write_row(w, instance.x().row(i))?;
    }
    write_row(w, instance.y())?;
    write_row(w, truth.beta())?;
    Ok(())
}

fn parse_floats(line: &str, lineno: usize, expected: usize) -> Result<Vec<f64>> {
    let vals = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("`{t}`: {e}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != expected {
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected {expected} values, found {}", vals.len()),
        });
    }
    Ok(vals)
}

pub fn read_instance<R: BufRead>(r: R) -> Result<InstanceFile> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i, l)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(Error::Parse {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let (ln, header) = next("header")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(Error::Parse {
            line: ln,
            message: "header must be `n p s0 sigma seed`".into(),
        });
    }
    let bad = |name: &str| Error::Parse {
        line: ln,
        message: format!("bad {name} in header"),
    };
    let n: usize = fields[0].parse().map_err(|_| bad("n"))?;
    let p: usize = fields[1].parse().map_err(|_| bad("p"))?;
    let s0: usize = fields[2].parse().map_err(|_| bad("s0"))?;
    let sigma: f64 = fields[3].parse().map_err(|_| bad("sigma"))?;
    let seed: u64 = fields[4].parse().map_err(|_| bad("seed"))?;

    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let (i, l) = next("design row")?;
        data.extend(parse_floats(&l, i, p)?);
    }
    let (i, l) = next("response")?;
    let y = parse_floats(&l, i, n)?;
    let (i, l) = next("true coefficients")?;
    let beta = parse_floats(&l, i, p)?;

    Ok(InstanceFile {
        instance: RegressionInstance::new(Matrix::new(n, p, data)?, y)?,
        truth: GroundTruth::new(beta, s0, sigma)?,
        seed,
    })
}
