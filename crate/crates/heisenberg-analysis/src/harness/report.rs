//! Inequality reports and their JSON, CSV and SVG renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, ExperimentKind};

pub const SCHEMA_VERSION: u32 = 1;

/// JSON cell for a float; non-finite values become the strings `"inf"`,
/// `"-inf"` and `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::from("nan")
    } else if x == f64::INFINITY {
        Value::from("inf")
    } else if x == f64::NEG_INFINITY {
        Value::from("-inf")
    } else {
        Value::from(x)
    }
}

/// Inverse of [`num`].
pub fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(x) => x.as_f64(),
        Value::String(s) => match s.as_str() {
            "nan" => Some(f64::NAN),
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            _ => None,
        },
        Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value ≤ limit`
    AtMost,
    /// `value < limit`
    Below,
    /// `value > limit`
    Above,
    /// `value` is finite
    Finite,
    /// `value` is 1 (boolean checks)
    True,
}

/// One gated metric: the report passes iff every check passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Value,
    pub relation: Relation,
    pub limit: Value,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, limit: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= limit,
            Relation::Below => value < limit,
            Relation::Above => value > limit,
            Relation::Finite => value.is_finite(),
            Relation::True => value == 1.0,
        };
        Self { name: name.into(), value: num(value), relation, limit: num(limit), passed }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Relation::True, 1.0)
    }
}

/// A per-case table; one CSV file per table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl CaseTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column values as floats (non-numeric cells are skipped).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().filter_map(|r| as_f64(&r[j])).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub derived: BTreeMap<String, Value>,
    pub fitted: BTreeMap<String, Value>,
    pub summary: BTreeMap<String, Value>,
    pub tolerances: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub tables: Vec<CaseTable>,
    pub plots: Vec<Plot>,
    pub notes: Vec<String>,
    /// Present only when timing was requested, so that reports stay
    /// byte-identical across runs otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl InequalityReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: config.experiment,
            config: config.clone(),
            seed: config.seed,
            derived: BTreeMap::new(),
            fitted: BTreeMap::new(),
            summary: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
            passed: false,
            tables: Vec::new(),
            plots: Vec::new(),
            notes: Vec::new(),
            wall_time_seconds: None,
        }
    }

    pub fn derived(&mut self, key: &str, x: f64) {
        self.derived.insert(key.into(), num(x));
    }

    pub fn fitted(&mut self, key: &str, x: f64) {
        self.fitted.insert(key.into(), num(x));
    }

    pub fn summary(&mut self, key: &str, x: f64) {
        self.summary.insert(key.into(), num(x));
    }

    pub fn tolerance(&mut self, key: &str, x: f64) {
        self.tolerances.insert(key.into(), num(x));
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Sets `passed` from the checks.
    pub fn finish(mut self) -> Self {
        self.passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn table(&self, name: &str) -> Option<&CaseTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(as_f64)
    }

    pub fn fitted_value(&self, key: &str) -> Option<f64> {
        self.fitted.get(key).and_then(as_f64)
    }

    pub fn derived_value(&self, key: &str) -> Option<f64> {
        self.derived.get(key).and_then(as_f64)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(Error::Config(format!("unknown output format `{other}` (expected json, csv or svg)"))),
        }
    }
}

/// Parses `json,csv,svg`.
pub fn parse_formats(list: &str) -> Result<Vec<Format>> {
    let mut out: Vec<Format> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Writes the report in the requested formats under `dir`; returns the
/// written paths in a fixed order.
pub fn emit_report(report: &InequalityReport, dir: &Path, stem: &str, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    for format in formats {
        match format {
            Format::Json => {
                let path = dir.join(format!("{stem}.json"));
                fs::write(&path, report.to_json()?)?;
                written.push(path);
            }
            Format::Csv => {
                for table in &report.tables {
                    let path = dir.join(format!("{stem}_{}.csv", table.name));
                    write_csv(table, &path)?;
                    written.push(path);
                }
            }
            Format::Svg => {
                for plot in &report.plots {
                    let path = dir.join(format!("{stem}_{}.svg", plot.name));
                    fs::write(&path, render_svg(plot))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn write_csv(table: &CaseTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Axis transform with padding; degenerate ranges are widened.
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> Option<f64> {
        let v = if self.log { v.log10() } else { v };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn label(&self, k: usize, ticks: usize) -> String {
        let v = self.lo + (self.hi - self.lo) * k as f64 / ticks as f64;
        let v = if self.log { 10f64.powf(v) } else { v };
        format!("{v:.3e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot with markers; log axes plot `log10` of the values.
pub fn render_svg(plot: &Plot) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (90.0, 170.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let xs = Axis::fit(plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), plot.log_x);
    let ys = Axis::fit(plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), plot.log_y);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, left + pw / 2.0, escape(&plot.title));
    let _ = writeln!(out, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let ticks = 4;
    for k in 0..=ticks {
        let fx = left + pw * k as f64 / ticks as f64;
        let fy = top + ph - ph * k as f64 / ticks as f64;
        let _ = writeln!(out, r##"<line x1="{fx:.2}" y1="{top}" x2="{fx:.2}" y2="{:.2}" stroke="#ddd"/>"##, top + ph);
        let _ = writeln!(out, r##"<line x1="{left}" y1="{fy:.2}" x2="{:.2}" y2="{fy:.2}" stroke="#ddd"/>"##, left + pw);
        let _ = writeln!(out, r#"<text x="{fx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, top + ph + 18.0, xs.label(k, ticks));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 6.0, fy + 4.0, ys.label(k, ticks));
    }
    let x_suffix = if plot.log_x { " (log)" } else { "" };
    let y_suffix = if plot.log_y { " (log)" } else { "" };
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}{x_suffix}</text>"#, left + pw / 2.0, h - 16.0, escape(&plot.x_label));
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}{y_suffix}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(&plot.y_label)
    );
    for (i, s) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter_map(|&(x, y)| Some((left + pw * xs.unit(x)?, top + ph - ph * ys.unit(y)?)))
            .collect();
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        }
        for (x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}
