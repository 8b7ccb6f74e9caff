//! Suite results and their JSON, CSV and text renderings.
//!
//! Everything that varies between identical runs (wall-clock time and
//! per-check runtimes) lives in the `run` header; the rest of a report is a
//! function of the seed and the configuration.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    /// Measured error (a count of mismatches for exact checks).
    pub error: f64,
    /// Tolerance after scaling.
    pub tolerance: f64,
    #[serde(default)]
    pub detail: String,
}

impl Check {
    /// Passes iff `error ≤ tolerance`; NaN never passes.
    pub fn new(id: impl Into<String>, error: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check { id: id.into(), passed: error <= tolerance, error, tolerance, detail: detail.into() }
    }

    /// Exact check: zero mismatches required.
    pub fn exact(id: impl Into<String>, mismatches: usize, detail: impl Into<String>) -> Self {
        Check::new(id, mismatches as f64, 0.0, detail)
    }

    /// A check that could not be evaluated.
    pub fn failed(id: impl Into<String>, err: &Error) -> Self {
        Check { id: id.into(), passed: false, error: f64::NAN, tolerance: 0.0, detail: format!("error: {err}") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Nondeterministic run metadata.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub timestamp: String,
    /// (check id, milliseconds).
    pub runtimes_ms: Vec<(String, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub run: RunInfo,
    pub tool: String,
    pub version: String,
    pub config: Option<String>,
    pub tolerance_scale: f64,
    pub suites: Vec<SuiteResult>,
}

impl Report {
    pub fn new(suites: Vec<SuiteResult>, run: RunInfo, config: Option<String>, tolerance_scale: f64) -> Self {
        Report {
            run,
            tool: "raysinger".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            tolerance_scale,
            suites,
        }
    }

    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(Error::InvalidInput(format!("unknown format {s:?}"))),
        }
    }
}

/// Shortest round-trip representation; NaN and infinities spelled out.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Three significant digits for the text table.
fn short(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2e}")
    } else {
        format!("{x}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str = "suite,seed,id,status,error,tolerance,detail";

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = format!("# run: {}\n{CSV_HEADER}\n", serde_json::to_string(&report.run).expect("serializes"));
            for suite in &report.suites {
                for c in &suite.checks {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        csv_field(&suite.suite),
                        suite.seed,
                        csv_field(&c.id),
                        if c.passed { "pass" } else { "FAIL" },
                        num(c.error),
                        num(c.tolerance),
                        csv_field(&c.detail)
                    );
                }
            }
            s
        }
        Format::Text => {
            let mut s = format!("run: {}\n", report.run.timestamp);
            let width =
                report.suites.iter().flat_map(|x| x.checks.iter()).map(|c| c.id.len()).max().unwrap_or(2).max(5);
            for suite in &report.suites {
                let _ = writeln!(s, "\n[{}] seed {}", suite.suite, suite.seed);
                for c in &suite.checks {
                    let _ = writeln!(
                        s,
                        "  {:<width$}  {:<4}  error {:>10}  tol {:>8}  {}",
                        c.id,
                        if c.passed { "pass" } else { "FAIL" },
                        short(c.error),
                        short(c.tolerance),
                        c.detail
                    );
                }
            }
            let (p, t) = report
                .suites
                .iter()
                .flat_map(|x| x.checks.iter())
                .fold((0, 0), |(p, t), c| (p + c.passed as usize, t + 1));
            let _ = writeln!(s, "\n{p}/{t} checks passed");
            s
        }
    }
}

/// Writes the report, or prints it when `path` is None.
pub fn emit_report(report: &Report, format: Format, path: Option<&std::path::Path>) -> Result<()> {
    let s = render(report, format);
    match path {
        Some(p) => std::fs::write(p, s).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let suite = SuiteResult {
            suite: "demo".into(),
            seed: 42,
            checks: vec![
                Check::new("a", 1e-9, 1e-6, ""),
                Check::exact("b", 2, "two, mismatches"),
                Check::new("c", f64::NAN, 1.0, ""),
            ],
        };
        Report::new(vec![suite], RunInfo { timestamp: "t0".into(), runtimes_ms: vec![] }, None, 1.0)
    }

    #[test]
    fn status_follows_tolerance() {
        let r = sample();
        let c = &r.suites[0].checks;
        assert!(c[0].passed && !c[1].passed && !c[2].passed);
        assert!(!r.passed());
    }

    #[test]
    fn json_round_trip() {
        let mut r = sample();
        r.suites[0].checks.pop();
        let back: Report = serde_json::from_str(&render(&r, Format::Json)).unwrap();
        assert_eq!(back, r);
        // an unevaluated check keeps a null error
        assert!(render(&sample(), Format::Json).contains("\"error\": null"));
    }

    #[test]
    fn csv_columns_fixed() {
        let s = render(&sample(), Format::Csv);
        let mut lines = s.lines().skip(1);
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        for l in lines {
            let mut cols = 0;
            let mut quoted = false;
            for ch in l.chars() {
                match ch {
                    '"' => quoted = !quoted,
                    ',' if !quoted => cols += 1,
                    _ => {}
                }
            }
            assert_eq!(cols + 1, 7, "{l}");
        }
    }

    #[test]
    fn only_run_header_differs() {
        let a = sample();
        let mut b = sample();
        b.run.timestamp = "t1".into();
        for f in [Format::Json, Format::Csv, Format::Text] {
            let (x, y) = (render(&a, f), render(&b, f));
            let dx: Vec<_> = x.lines().filter(|l| !l.contains("t0")).collect();
            let dy: Vec<_> = y.lines().filter(|l| !l.contains("t1")).collect();
            assert_eq!(dx, dy);
        }
    }

    #[test]
    fn text_marks_failures() {
        let s = render(&sample(), Format::Text);
        assert!(s.contains("FAIL") && s.contains("1/3 checks passed"));
    }
}
