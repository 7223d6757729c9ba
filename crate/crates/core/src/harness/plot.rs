//! Per-method histograms of the sweep results as standalone SVG 1.1.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{ExperimentRecord, Method};

pub const BINS: usize = 30;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    PredError,
    WallTime,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::PredError, Metric::WallTime];

    pub fn name(self) -> &'static str {
        match self {
            Metric::PredError => "pred_error",
            Metric::WallTime => "wall_time_s",
        }
    }

    fn axis_label(self) -> &'static str {
        match self {
            Metric::PredError => "prediction error  ‖X(b̂ − β)‖₂ / √n",
            Metric::WallTime => "wall time (s)",
        }
    }

    fn of(self, r: &ExperimentRecord) -> f64 {
        match self {
            Metric::PredError => r.pred_error,
            Metric::WallTime => r.wall_time_s,
        }
    }
}

fn color(m: Method) -> &'static str {
    match m {
        Method::HedgeFwAggregate => "#1f77b4",
        Method::HedgeFwSelect => "#2ca02c",
        Method::CvLasso => "#d62728",
    }
}

/// Range shared by all methods. A zero-width range is widened so every
/// value lands in one interior bin.
pub fn pooled_range(values: &[f64]) -> Option<(f64, f64)> {
    let mut it = values.iter().copied().filter(|v| v.is_finite());
    let first = it.next()?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi > lo {
        Some((lo, hi))
    } else {
        let pad = (lo.abs() * 0.5).max(1e-9);
        Some((lo - pad, hi + pad))
    }
}

/// Counts per bin over `[lo, hi]`; the top edge belongs to the last bin.
pub fn histogram_counts(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    let width = (hi - lo) / bins as f64;
    for &v in values.iter().filter(|v| v.is_finite()) {
        let k = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One SVG document: a histogram group per method present in `records`.
pub fn histogram_svg(records: &[ExperimentRecord], metric: Metric) -> Result<String> {
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| records.iter().any(|r| r.method == *m))
        .collect();
    let values = |m: Method| -> Vec<f64> {
        records
            .iter()
            .filter(|r| r.method == m && r.is_ok())
            .map(|r| metric.of(r))
            .collect()
    };
    let pooled: Vec<f64> = methods.iter().flat_map(|&m| values(m)).collect();
    let (lo, hi) = pooled_range(&pooled).ok_or(Error::Empty("record set"))?;
    let counts: Vec<(Method, Vec<usize>)> = methods
        .iter()
        .map(|&m| (m, histogram_counts(&values(m), lo, hi, BINS)))
        .collect();
    let ymax = counts
        .iter()
        .flat_map(|(_, c)| c.iter().copied())
        .max()
        .unwrap_or(1)
        .max(1);

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let x_of = |v: f64| LEFT + (v - lo) / (hi - lo) * pw;
    let y_of = |c: f64| TOP + ph - c / ymax as f64 * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<title>{}</title>", metric.name());
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // axes
    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}"/>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph
    );
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}"/>"#, TOP + ph);
    for k in 0..=5 {
        let v = lo + (hi - lo) * k as f64 / 5.0;
        let x = x_of(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle" stroke="none">{v:.3e}</text>"#,
            TOP + ph + 18.0
        );
        let c = ymax as f64 * k as f64 / 5.0;
        let y = y_of(c);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}"/>"#, LEFT - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end" stroke="none">{c:.1}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text class="xlabel" x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(metric.axis_label())
    );
    let _ = writeln!(
        s,
        r#"<text class="ylabel" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">trials</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    // bars: within each bin, one slot per method
    let bin_w = pw / BINS as f64;
    let slot = bin_w / methods.len() as f64;
    for (mi, (m, c)) in counts.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<g class="histogram" data-method="{}" fill="{}" fill-opacity="0.85">"#,
            m.label(),
            color(*m)
        );
        for (k, &n) in c.iter().enumerate().filter(|(_, n)| **n > 0) {
            let x = LEFT + k as f64 * bin_w + mi as f64 * slot;
            let y = y_of(n as f64);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{slot:.2}" height="{:.2}"><title>{}: {n}</title></rect>"#,
                TOP + ph - y,
                m.label()
            );
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r#"<g class="legend">"#);
    for (i, m) in methods.iter().enumerate() {
        let y = TOP + 10.0 + i as f64 * 22.0;
        let x = WIDTH - RIGHT + 20.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="14" height="14" fill="{}"/>"#,
            color(*m)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 20.0, y + 11.0, m.label());
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

/// Writes `pred_error.svg` and `wall_time_s.svg` into `dir`.
pub fn emit_svg_histograms(records: &[ExperimentRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Empty("record set"));
    }
    fs::create_dir_all(dir)?;
    Metric::ALL
        .iter()
        .map(|&metric| {
            let path = dir.join(format!("{}.svg", metric.name()));
            fs::write(&path, histogram_svg(records, metric)?)?;
            Ok(path)
        })
        .collect()
}
