//! Monte Carlo comparison of Hedge/Frank-Wolfe against cross-validated
//! LASSO on seeded synthetic instances.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::baseline::{cv_lasso, lambda_path, standardize_columns};
use crate::datagen::{child_seed, gen_instance};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::plot::emit_svg_histograms;
use crate::hedge_fw::{default_grid, run_hedge_fw};
use crate::metrics::{time_block, Summary, TrialMetrics};
use crate::model::{ExperimentRecord, GroundTruth, Method, RegressionInstance};

pub const CSV_HEADER: &str = "trial,method,pred_error,resid_error,est_error,support_f1,wall_time_s,seed,error";

/// Column index of `wall_time_s`, the only schedule-dependent column.
pub const TIMING_COLUMN: usize = 6;

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Estimates produced for one trial, before metrics.
struct TrialEstimates {
    aggregate: Vec<f64>,
    select: Vec<f64>,
    hedge_time: f64,
    cv: Vec<f64>,
    cv_time: f64,
}

fn estimate(config: &ExperimentConfig, instance: &RegressionInstance, seed: u64) -> Result<TrialEstimates> {
    let hedge_cfg = config.hedge_config()?;
    let (hedge, hedge_time) = time_block(|| -> Result<_> {
        let grid = default_grid(instance, config.grid_size)?;
        run_hedge_fw(instance, &grid, &hedge_cfg, &config.fw)
    });
    let hedge = hedge?;
    let aggregate = hedge.aggregate();
    let select = hedge.select(config.dirac_tolerance)?.beta;

    let (cv, cv_time) = time_block(|| -> Result<Vec<f64>> {
        if config.cv_standardize {
            let (scaled, scales) = standardize_columns(instance)?;
            let path = lambda_path(&scaled, config.grid_size)?;
            let res = cv_lasso(&scaled, &path, config.cv_folds, seed)?;
            Ok(res.final_beta.iter().zip(&scales).map(|(b, s)| b / s).collect())
        } else {
            let path = lambda_path(instance, config.grid_size)?;
            Ok(cv_lasso(instance, &path, config.cv_folds, seed)?.final_beta)
        }
    });
    Ok(TrialEstimates {
        aggregate,
        select,
        hedge_time,
        cv: cv?,
        cv_time,
    })
}

fn record(
    trial: usize,
    method: Method,
    seed: u64,
    digest: &str,
    metrics: std::result::Result<TrialMetrics, String>,
) -> ExperimentRecord {
    let (m, error) = match metrics {
        Ok(m) => (m, None),
        Err(e) => (
            TrialMetrics {
                pred_error: f64::NAN,
                resid_error: f64::NAN,
                est_error: f64::NAN,
                support_f1: f64::NAN,
                wall_time_s: f64::NAN,
            },
            Some(e),
        ),
    };
    ExperimentRecord {
        trial,
        method,
        pred_error: m.pred_error,
        resid_error: m.resid_error,
        est_error: m.est_error,
        support_f1: m.support_f1,
        wall_time_s: m.wall_time_s,
        seed,
        config_digest: digest.to_string(),
        error,
    }
}

/// Runs one trial and returns its three records, in [`Method::ALL`] order.
/// Failures are captured in the records' error field.
pub fn run_trial(config: &ExperimentConfig, trial: usize, digest: &str) -> Vec<ExperimentRecord> {
    let seed = child_seed(config.spec.seed, trial as u64);
    let outcome = gen_instance(&config.spec.with_seed(seed)).and_then(|(inst, truth)| {
        let est = estimate(config, &inst, seed)?;
        Ok((inst, truth, est))
    });
    let (inst, truth, est) = match outcome {
        Ok(v) => v,
        Err(e) => {
            return Method::ALL
                .iter()
                .map(|&m| record(trial, m, seed, digest, Err(e.to_string())))
                .collect()
        }
    };
    let metrics = |b: &[f64], t: f64| TrialMetrics::compute(&inst, &truth, b, t).map_err(|e| e.to_string());
    vec![
        record(
            trial,
            Method::HedgeFwAggregate,
            seed,
            digest,
            metrics(&est.aggregate, est.hedge_time),
        ),
        record(
            trial,
            Method::HedgeFwSelect,
            seed,
            digest,
            metrics(&est.select, est.hedge_time),
        ),
        record(trial, Method::CvLasso, seed, digest, metrics(&est.cv, est.cv_time)),
    ]
}

/// Regenerates the instance of trial `trial` of a sweep.
pub fn trial_instance(config: &ExperimentConfig, trial: usize) -> Result<(RegressionInstance, GroundTruth)> {
    gen_instance(&config.spec.with_seed(child_seed(config.spec.seed, trial as u64)))
}

/// 17 significant digits; empty for NaN.
fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

pub fn format_record(r: &ExperimentRecord) -> String {
    let err = r
        .error
        .as_deref()
        .map(|e| e.replace([',', '\n', '\r'], ";"))
        .unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.trial,
        r.method,
        fmt_float(r.pred_error),
        fmt_float(r.resid_error),
        fmt_float(r.est_error),
        fmt_float(r.support_f1),
        fmt_float(r.wall_time_s),
        r.seed,
        err
    )
}

/// Reads a `records.csv` back. The config digest is not stored in the file
/// and comes back empty.
pub fn parse_records(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "missing records.csv header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::Parse {
            line: i + 1,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.splitn(9, ',').collect();
        if f.len() != 9 {
            return Err(bad("expected 9 columns"));
        }
        let num = |s: &str| -> Result<f64> {
            if s.is_empty() {
                Ok(f64::NAN)
            } else {
                s.parse().map_err(|_| bad(&format!("bad number `{s}`")))
            }
        };
        out.push(ExperimentRecord {
            trial: f[0].parse().map_err(|_| bad("bad trial index"))?,
            method: f[1].parse().map_err(|_| bad("unknown method"))?,
            pred_error: num(f[2])?,
            resid_error: num(f[3])?,
            est_error: num(f[4])?,
            support_f1: num(f[5])?,
            wall_time_s: num(f[6])?,
            seed: f[7].parse().map_err(|_| bad("bad seed"))?,
            config_digest: String::new(),
            error: (!f[8].is_empty()).then(|| f[8].to_string()),
        });
    }
    Ok(out)
}

/// Runs the sweep, writing `records.csv` row by row, then `summary.txt`
/// and, if enabled, the SVG histograms.
///
/// Trials run on a pool of `config.threads` workers in batches; each batch
/// is written in trial order, so the file does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let digest = config.digest();
    let mut csv = BufWriter::new(File::create(config.output_dir.join(RECORDS_FILE))?);
    writeln!(csv, "{CSV_HEADER}")?;
    csv.flush()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let batch = config.threads * 4;
    let mut records = Vec::with_capacity(config.trials * Method::ALL.len());
    let mut start = 0;
    while start < config.trials {
        let end = (start + batch).min(config.trials);
        let done: Vec<Vec<ExperimentRecord>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|t| run_trial(config, t, &digest))
                .collect()
        });
        for r in done.into_iter().flatten() {
            writeln!(csv, "{}", format_record(&r))?;
            records.push(r);
        }
        csv.flush()?;
        start = end;
    }

    let summary = ExperimentSummary::from_records(&records);
    fs::write(config.output_dir.join(SUMMARY_FILE), summary.render(config))?;
    if config.emit_svg && !records.is_empty() {
        emit_svg_histograms(&records, &config.output_dir)?;
    }
    Ok(records)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub succeeded: usize,
    pub failed: usize,
    pub pred_error: Option<Summary>,
    pub wall_time: Option<Summary>,
    pub total_wall_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSummary {
    pub methods: Vec<MethodSummary>,
    /// Total Hedge/Frank-Wolfe time over total CV time, counting the Hedge
    /// run once per trial.
    pub speed_ratio: Option<f64>,
}

impl ExperimentSummary {
    pub fn from_records(records: &[ExperimentRecord]) -> Self {
        let methods: Vec<MethodSummary> = Method::ALL
            .iter()
            .map(|&m| {
                let rows: Vec<&ExperimentRecord> = records.iter().filter(|r| r.method == m).collect();
                let ok: Vec<&ExperimentRecord> = rows.iter().copied().filter(|r| r.is_ok()).collect();
                let pred: Vec<f64> = ok.iter().map(|r| r.pred_error).collect();
                let time: Vec<f64> = ok.iter().map(|r| r.wall_time_s).collect();
                MethodSummary {
                    method: m,
                    succeeded: ok.len(),
                    failed: rows.len() - ok.len(),
                    pred_error: Summary::of(&pred),
                    wall_time: Summary::of(&time),
                    total_wall_time: time.iter().sum(),
                }
            })
            .collect();
        let total = |m: Method| {
            methods
                .iter()
                .find(|s| s.method == m)
                .map_or(0.0, |s| s.total_wall_time)
        };
        let cv = total(Method::CvLasso);
        let speed_ratio = (cv > 0.0).then(|| total(Method::HedgeFwAggregate) / cv);
        ExperimentSummary { methods, speed_ratio }
    }

    pub fn get(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == method)
    }

    pub fn render(&self, config: &ExperimentConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "config_digest={}", config.digest());
        let _ = writeln!(
            s,
            "n={} p={} s0={} sigma={} design={} trials={} grid_size={}",
            config.spec.n,
            config.spec.p,
            config.spec.s0,
            config.spec.sigma,
            config.spec.design,
            config.trials,
            config.grid_size
        );
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<20} {:>4} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
            "method",
            "ok",
            "failed",
            "pred_median",
            "pred_mean",
            "pred_iqr",
            "time_median",
            "time_mean",
            "time_iqr",
            "time_total"
        );
        for m in &self.methods {
            let (pm, pa, pi) = m
                .pred_error
                .map_or((f64::NAN, f64::NAN, f64::NAN), |v| (v.median, v.mean, v.iqr()));
            let (tm, ta, ti) = m
                .wall_time
                .map_or((f64::NAN, f64::NAN, f64::NAN), |v| (v.median, v.mean, v.iqr()));
            let _ = writeln!(
                s,
                "{:<20} {:>4} {:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                m.method.label(),
                m.succeeded,
                m.failed,
                pm,
                pa,
                pi,
                tm,
                ta,
                ti,
                m.total_wall_time
            );
        }
        let _ = writeln!(s);
        match self.speed_ratio {
            Some(r) => {
                let _ = writeln!(
                    s,
                    "wall_time_ratio hedge_fw/cv_lasso = {r:.4} (cv_lasso is {:.1}x slower)",
                    1.0 / r
                );
            }
            None => {
                let _ = writeln!(s, "wall_time_ratio hedge_fw/cv_lasso = n/a");
            }
        }
        s
    }
}

/// Drops the timing column from a records file, for comparisons between
/// runs.
pub fn strip_timing(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            l.splitn(9, ',')
                .enumerate()
                .filter(|(i, _)| *i != TIMING_COLUMN)
                .map(|(_, f)| f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Reads `records.csv` from a directory or file path.
pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let file = if path.is_dir() {
        path.join(RECORDS_FILE)
    } else {
        path.to_path_buf()
    };
    parse_records(&fs::read_to_string(file)?)
}
