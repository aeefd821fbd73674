//! Verification reports and their text, JSON and CSV forms.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt::Write as _;

use crate::chart::Point;
use crate::codazzi::SweepStats;
use crate::diff::DiffScheme;
use crate::error::{GeomError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(GeomError::Config(format!("unknown format {s:?} (text, json, csv)"))),
        }
    }
}

/// Whether `max` must stay below the tolerance or (negative controls) exceed it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

/// JSON has no infinities; write them (and NaN) as strings.
mod real {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("not a number: {t:?}"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRow {
    pub id: String,
    /// Which claim the row verifies, in words.
    pub anchor: String,
    #[serde(with = "real")]
    pub max: f64,
    #[serde(with = "real")]
    pub mean: f64,
    #[serde(with = "real")]
    pub tolerance: f64,
    pub bound: Bound,
    pub argmax: Option<Vec<f64>>,
    pub points: usize,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(id: &str, anchor: &str, max: f64, mean: f64, argmax: Option<&Point>, points: usize, tolerance: f64, bound: Bound) -> Self {
        let pass = match bound {
            Bound::AtMost => max <= tolerance,
            Bound::AtLeast => max >= tolerance,
        };
        CheckRow {
            id: id.into(),
            anchor: anchor.into(),
            max,
            mean,
            tolerance,
            bound,
            argmax: argmax.map(|p| p.coords().to_vec()),
            points,
            pass,
        }
    }

    pub fn from_stats(id: &str, anchor: &str, s: &SweepStats, tolerance: f64, bound: Bound) -> Self {
        Self::new(id, anchor, s.max, s.mean, s.argmax.as_ref(), s.count, tolerance, bound)
    }

    /// A single scalar (count or pointwise quantity) with no grid.
    pub fn scalar(id: &str, anchor: &str, value: f64, tolerance: f64, bound: Bound) -> Self {
        Self::new(id, anchor, value, value, None, 1, tolerance, bound)
    }

    fn recheck(&mut self) {
        self.pass = match self.bound {
            Bound::AtMost => self.max <= self.tolerance,
            Bound::AtLeast => self.max >= self.tolerance,
        };
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub scenario: String,
    pub checks: Vec<CheckRow>,
    pub pass: bool,
    #[serde(with = "real")]
    pub runtime_s: f64,
    pub scheme: DiffScheme,
    pub seed: u64,
}

impl VerificationReport {
    pub fn new(scenario: &str, scheme: DiffScheme, seed: u64) -> Self {
        VerificationReport {
            scenario: scenario.into(),
            checks: Vec::new(),
            pass: true,
            runtime_s: 0.0,
            scheme,
            seed,
        }
    }

    pub fn push(&mut self, row: CheckRow) {
        self.checks.push(row);
        self.refresh();
    }

    pub fn refresh(&mut self) {
        self.pass = self.checks.iter().all(|c| c.pass);
    }

    /// Replace tolerances by id; ids that match no row are an error.
    pub fn apply_overrides(&mut self, overrides: &std::collections::BTreeMap<String, f64>) -> Result<()> {
        for (id, &tol) in overrides {
            let mut hit = false;
            for row in self.checks.iter_mut().filter(|r| r.id == *id || r.id.ends_with(&format!("/{id}"))) {
                row.tolerance = tol;
                row.recheck();
                hit = true;
            }
            if !hit {
                return Err(GeomError::Config(format!("tolerance override for unknown check {id:?}")));
            }
        }
        self.refresh();
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Scientific notation with three significant digits.
pub fn sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.2e}")
    } else {
        format!("{v}")
    }
}

fn point_text(p: &Option<Vec<f64>>) -> String {
    match p {
        None => "-".into(),
        Some(c) => {
            let parts: Vec<String> = c.iter().map(|x| format!("{x:.3}")).collect();
            format!("({})", parts.join(", "))
        }
    }
}

pub fn to_text(r: &VerificationReport) -> String {
    let mut out = String::new();
    let s = &r.scheme;
    let _ = writeln!(out, "scenario: {}", r.scenario);
    let _ = writeln!(
        out,
        "scheme: h={} h3={} stencil={} richardson={} exact_jets={} axis_scale={:?}  seed={}",
        s.step, s.step3, s.stencil_order, s.richardson_levels, s.use_exact_jets, s.axis_scale, r.seed
    );
    let _ = writeln!(
        out,
        "{:<4} {:<40} {:>10} {:>10} {:>12} {:>6} {:<26} anchor",
        "", "check", "max", "mean", "tolerance", "points", "argmax"
    );
    for c in &r.checks {
        let tol = match c.bound {
            Bound::AtMost => format!("<= {}", sci(c.tolerance)),
            Bound::AtLeast => format!(">= {}", sci(c.tolerance)),
        };
        let _ = writeln!(
            out,
            "{:<4} {:<40} {:>10} {:>10} {:>12} {:>6} {:<26} {}",
            if c.pass { "ok" } else { "FAIL" },
            c.id,
            sci(c.max),
            sci(c.mean),
            tol,
            c.points,
            point_text(&c.argmax),
            c.anchor
        );
    }
    let failed = r.failures().count();
    let _ = writeln!(
        out,
        "verdict: {} ({} checks, {} failed) runtime {:.2} s",
        if r.pass { "PASS" } else { "FAIL" },
        r.checks.len(),
        failed,
        r.runtime_s
    );
    for c in r.failures() {
        let _ = writeln!(out, "  failed: {} max {} tolerance {}", c.id, sci(c.max), sci(c.tolerance));
    }
    out
}

pub fn to_json(r: &VerificationReport) -> Result<String> {
    serde_json::to_string_pretty(r).map_err(|e| GeomError::Config(format!("json encoding: {e}")))
}

pub fn parse_report(text: &str) -> Result<VerificationReport> {
    serde_json::from_str(text).map_err(|e| GeomError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn to_csv(r: &VerificationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| GeomError::Config(format!("csv encoding: {e}"));
    w.write_record(["scenario", "id", "anchor", "max", "mean", "tolerance", "bound", "points", "argmax", "pass"])
        .map_err(io)?;
    for c in &r.checks {
        let bound = match c.bound {
            Bound::AtMost => "at_most",
            Bound::AtLeast => "at_least",
        };
        let argmax = c
            .argmax
            .as_ref()
            .map(|v| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        w.write_record([
            r.scenario.as_str(),
            &c.id,
            &c.anchor,
            &format!("{:e}", c.max),
            &format!("{:e}", c.mean),
            &format!("{:e}", c.tolerance),
            bound,
            &c.points.to_string(),
            &argmax,
            if c.pass { "true" } else { "false" },
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| GeomError::Config(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn serialize_report(r: &VerificationReport, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(to_text(r)),
        Format::Json => to_json(r),
        Format::Csv => to_csv(r),
    }
}
