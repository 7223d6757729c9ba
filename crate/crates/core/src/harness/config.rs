//! `key=value` experiment configuration.
//!
//! Values come from three layers, later ones winning: the config file, the
//! `--full-scale` preset, then individual command-line overrides. Unknown
//! keys are errors in every layer.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::datagen::{Design, SyntheticSpec};
use crate::error::{Error, Result};
use crate::model::{FwConfig, HedgeConfig};

/// Accepted keys, in the order `--print-config` writes them.
pub const KEYS: &[&str] = &[
    "n",
    "p",
    "s0",
    "sigma",
    "design",
    "rho",
    "seed",
    "trials",
    "grid_size",
    "eta",
    "dirac_tolerance",
    "loss_cap",
    "k_step",
    "cv_folds",
    "cv_standardize",
    "output_dir",
    "emit_svg",
    "threads",
];

/// Keys that cannot change any non-timing result; left out of the digest.
const UNDIGESTED: &[&str] = &["output_dir", "emit_svg", "threads"];

pub const FULL_SCALE_TRIALS: usize = 1000;

const DEFAULT_RHO: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Instance template; `spec.seed` is the master seed of the sweep.
    pub spec: SyntheticSpec,
    pub trials: usize,
    /// Size of both the radius grid and the λ grid.
    pub grid_size: usize,
    /// Hedge rate; `None` means `sqrt(8 ln G / n)`.
    pub eta: Option<f64>,
    pub dirac_tolerance: f64,
    pub loss_cap: Option<f64>,
    pub fw: FwConfig,
    pub cv_folds: usize,
    /// Fit the CV baseline on unit mean-square columns.
    pub cv_standardize: bool,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    pub threads: usize,
}

impl ExperimentConfig {
    /// Defaults for everything but the required `n` and `p`.
    pub fn with_dims(n: usize, p: usize) -> Self {
        ExperimentConfig {
            spec: SyntheticSpec {
                n,
                p,
                s0: 5,
                sigma: 0.1,
                design: Design::GaussianIid,
                seed: 0,
            },
            trials: 50,
            grid_size: 20,
            eta: None,
            dirac_tolerance: HedgeConfig::DEFAULT_DIRAC_TOLERANCE,
            loss_cap: None,
            fw: FwConfig::default(),
            cv_folds: 5,
            cv_standardize: false,
            output_dir: PathBuf::from("results"),
            emit_svg: true,
            threads: 1,
        }
    }

    /// Resolves a config from optional file text, the full-scale preset and
    /// `(key, value)` overrides.
    pub fn resolve(file: Option<&str>, full_scale: bool, overrides: &[(String, String)]) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        if let Some(text) = file {
            entries.extend(parse_lines(text)?);
        }
        if full_scale {
            entries.push(("trials".into(), FULL_SCALE_TRIALS.to_string()));
        }
        for (k, v) in overrides {
            check_key(k).map_err(|e| Error::Config(format!("{e} (command line)")))?;
            entries.push((k.clone(), v.clone()));
        }
        Self::from_entries(&entries)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::resolve(Some(text), false, &[])
    }

    fn from_entries(entries: &[(String, String)]) -> Result<Self> {
        let get = |key: &str| entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let n = get("n").ok_or_else(|| missing("n"))?;
        let p = get("p").ok_or_else(|| missing("p"))?;
        let mut c = ExperimentConfig::with_dims(parse_value("n", n)?, parse_value("p", p)?);
        let mut rho = DEFAULT_RHO;
        let mut toeplitz = false;

        for key in KEYS {
            let Some(v) = get(key) else { continue };
            match *key {
                "n" | "p" => {}
                "s0" => c.spec.s0 = parse_value(key, v)?,
                "sigma" => c.spec.sigma = parse_value(key, v)?,
                "design" => {
                    toeplitz = match v {
                        "gaussian_iid" => false,
                        "toeplitz_correlated" => true,
                        _ => return Err(type_error(key, "gaussian_iid or toeplitz_correlated", v)),
                    }
                }
                "rho" => rho = parse_value(key, v)?,
                "seed" => c.spec.seed = parse_value(key, v)?,
                "trials" => c.trials = parse_value(key, v)?,
                "grid_size" => c.grid_size = parse_value(key, v)?,
                "eta" => c.eta = parse_optional(key, v, "auto")?,
                "dirac_tolerance" => c.dirac_tolerance = parse_value(key, v)?,
                "loss_cap" => c.loss_cap = parse_optional(key, v, "off")?,
                "k_step" => c.fw = FwConfig::new(parse_value(key, v)?)?,
                "cv_folds" => c.cv_folds = parse_value(key, v)?,
                "cv_standardize" => c.cv_standardize = parse_value(key, v)?,
                "output_dir" => c.output_dir = PathBuf::from(v),
                "emit_svg" => c.emit_svg = parse_value(key, v)?,
                "threads" => c.threads = parse_value(key, v)?,
                _ => unreachable!("key list and match arms out of sync"),
            }
        }
        c.spec.design = if toeplitz {
            Design::ToeplitzCorrelated { rho }
        } else {
            Design::GaussianIid
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if self.cv_folds > self.spec.n {
            return Err(Error::Config(format!(
                "cv_folds = {} exceeds n = {}",
                self.cv_folds, self.spec.n
            )));
        }
        if self.grid_size < 2 {
            return Err(Error::Config("grid_size must be at least 2".into()));
        }
        if self.threads < 1 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.hedge_config()?;
        FwConfig::new(self.fw.k_step)?;
        Ok(())
    }

    /// Hedge settings with the rate resolved.
    pub fn hedge_config(&self) -> Result<HedgeConfig> {
        let eta = self
            .eta
            .unwrap_or_else(|| HedgeConfig::tuned_eta(self.grid_size, self.spec.n));
        HedgeConfig::new(eta, self.dirac_tolerance)?.with_loss_cap(self.loss_cap)
    }

    fn value_of(&self, key: &str) -> String {
        let rho = match self.spec.design {
            Design::ToeplitzCorrelated { rho } => rho,
            Design::GaussianIid => DEFAULT_RHO,
        };
        match key {
            "n" => self.spec.n.to_string(),
            "p" => self.spec.p.to_string(),
            "s0" => self.spec.s0.to_string(),
            "sigma" => format!("{:?}", self.spec.sigma),
            "design" => self.spec.design.name().to_string(),
            "rho" => format!("{rho:?}"),
            "seed" => self.spec.seed.to_string(),
            "trials" => self.trials.to_string(),
            "grid_size" => self.grid_size.to_string(),
            "eta" => self.eta.map_or("auto".into(), |e| format!("{e:?}")),
            "dirac_tolerance" => format!("{:?}", self.dirac_tolerance),
            "loss_cap" => self.loss_cap.map_or("off".into(), |e| format!("{e:?}")),
            "k_step" => format!("{:?}", self.fw.k_step),
            "cv_folds" => self.cv_folds.to_string(),
            "cv_standardize" => self.cv_standardize.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            "emit_svg" => self.emit_svg.to_string(),
            "threads" => self.threads.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    fn printed_keys(&self) -> impl Iterator<Item = &'static str> + '_ {
        // rho only matters for the correlated design
        KEYS.iter()
            .copied()
            .filter(|k| *k != "rho" || matches!(self.spec.design, Design::ToeplitzCorrelated { .. }))
    }

    /// Fully resolved config as `key=value` lines; parses back to `self`.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        for key in self.printed_keys() {
            let _ = writeln!(s, "{key}={}", self.value_of(key));
        }
        s
    }

    /// Short SHA-256 digest of every setting that can affect non-timing
    /// results.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for key in self.printed_keys().filter(|k| !UNDIGESTED.contains(k)) {
            h.update(format!("{key}={}\n", self.value_of(key)).as_bytes());
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown key `{key}`")))
    }
}

fn missing(key: &str) -> Error {
    Error::Config(format!("missing required field `{key}`"))
}

fn type_error(key: &str, expected: &str, got: &str) -> Error {
    Error::Config(format!("`{key}`: expected {expected}, got `{got}`"))
}

trait ConfigValue: Sized {
    const EXPECTED: &'static str;
    fn parse_config(s: &str) -> Option<Self>;
}

impl ConfigValue for usize {
    const EXPECTED: &'static str = "a nonnegative integer";
    fn parse_config(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ConfigValue for u64 {
    const EXPECTED: &'static str = "an unsigned 64-bit integer";
    fn parse_config(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ConfigValue for f64 {
    const EXPECTED: &'static str = "a finite number";
    fn parse_config(s: &str) -> Option<Self> {
        s.parse().ok().filter(|v: &f64| v.is_finite())
    }
}

impl ConfigValue for bool {
    const EXPECTED: &'static str = "true or false";
    fn parse_config(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

fn parse_value<T: ConfigValue>(key: &str, v: &str) -> Result<T> {
    T::parse_config(v).ok_or_else(|| type_error(key, T::EXPECTED, v))
}

fn parse_optional(key: &str, v: &str, none: &str) -> Result<Option<f64>> {
    if v == none {
        Ok(None)
    } else {
        f64::parse_config(v)
            .map(Some)
            .ok_or_else(|| type_error(key, &format!("`{none}` or a number"), v))
    }
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_lines(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected key=value, got `{line}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        check_key(k).map_err(|e| Error::Config(format!("{e} on line {}", i + 1)))?;
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(Error::Config(format!("duplicate key `{k}` on line {}", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(k: &str, v: &str) -> (String, String) {
        (k.to_string(), v.to_string())
    }

    #[test]
    fn flags_override_file() {
        let c = ExperimentConfig::resolve(Some("n=10\np=5\ntrials=10\n"), false, &[ov("trials", "50")]).unwrap();
        assert_eq!(c.trials, 50);
    }

    #[test]
    fn full_scale_sits_between_file_and_flags() {
        let c = ExperimentConfig::resolve(Some("n=10\np=5\ntrials=10"), true, &[]).unwrap();
        assert_eq!(c.trials, 1000);
        let c = ExperimentConfig::resolve(Some("n=10\np=5"), true, &[ov("trials", "7")]).unwrap();
        assert_eq!(c.trials, 7);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::parse_str("n=10\np=5\ntrails=10").unwrap_err();
        assert!(err.to_string().contains("`trails`"), "{err}");
        let err = ExperimentConfig::resolve(Some("n=10\np=5"), false, &[ov("trails", "1")]).unwrap_err();
        assert!(err.to_string().contains("`trails`"), "{err}");
    }

    #[test]
    fn type_mismatch_and_missing_fields() {
        let err = ExperimentConfig::parse_str("n=10\np=5\ntrials=ten").unwrap_err();
        assert!(err.to_string().contains("trials"), "{err}");
        let err = ExperimentConfig::parse_str("p=5").unwrap_err();
        assert!(err.to_string().contains("`n`"), "{err}");
        let err = ExperimentConfig::parse_str("n=5").unwrap_err();
        assert!(err.to_string().contains("`p`"), "{err}");
        assert!(ExperimentConfig::parse_str("n=10\np=5\ndesign=banded").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\nemit_svg=yes").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\nn=11").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\nnonsense").is_err());
    }

    #[test]
    fn range_checks() {
        assert!(ExperimentConfig::parse_str("n=10\np=5\ncv_folds=1").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\ncv_folds=11").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\ngrid_size=1").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\ntrials=0").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\ns0=6").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\neta=-1").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\nk_step=0.5").is_err());
        assert!(ExperimentConfig::parse_str("n=10\np=5\ndesign=toeplitz_correlated\nrho=1").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = ExperimentConfig::parse_str("# sweep\n\nn = 10   # obs\np=5\n").unwrap();
        assert_eq!((c.spec.n, c.spec.p), (10, 5));
    }

    #[test]
    fn printed_config_round_trips() {
        let text = "n=100\np=34\nsigma=0.001\ndesign=toeplitz_correlated\nrho=0.9\neta=0.37\nloss_cap=50\n\
                    seed=18446744073709551615\ncv_standardize=true\noutput_dir=/tmp/x y\nthreads=8";
        let c = ExperimentConfig::parse_str(text).unwrap();
        let again = ExperimentConfig::parse_str(&c.to_config_text()).unwrap();
        assert_eq!(c, again);
        let d = ExperimentConfig::with_dims(80, 200);
        let printed = d.to_config_text();
        assert_eq!(ExperimentConfig::parse_str(&printed).unwrap(), d);
        assert_eq!(printed.lines().count(), KEYS.len() - 1);
    }

    #[test]
    fn digest_ignores_scheduling_keys() {
        let a = ExperimentConfig::parse_str("n=10\np=5\nthreads=1\noutput_dir=a").unwrap();
        let b = ExperimentConfig::parse_str("n=10\np=5\nthreads=8\noutput_dir=b").unwrap();
        let c = ExperimentConfig::parse_str("n=10\np=5\nseed=1").unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn auto_eta_uses_grid_and_horizon() {
        let c = ExperimentConfig::parse_str("n=100\np=5\ngrid_size=20").unwrap();
        let h = c.hedge_config().unwrap();
        assert_eq!(h.eta, HedgeConfig::tuned_eta(20, 100));
    }
}
