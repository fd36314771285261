use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gencheb::solvers::ConvergenceTrace;
use serde::Serialize;

use crate::error::CliError;

pub const TRACE_FILE: &str = "trace.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const TRACE_COLUMNS: [&str; 6] = ["m", "scheme", "err_norm", "residual", "ratio", "matvecs"];

#[derive(Serialize)]
struct TraceRow<'a> {
    m: usize,
    scheme: &'a str,
    err_norm: Option<f64>,
    residual: f64,
    ratio: Option<f64>,
    matvecs: usize,
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Internal(format!("{}: {other:?}", path.display())),
    }
}

/// Writes all traces to one CSV; the header is always present. A trace that
/// took no step contributes no rows.
pub fn write_traces(dir: &Path, traces: &[ConvergenceTrace]) -> Result<PathBuf, CliError> {
    let path = dir.join(TRACE_FILE);
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path).map_err(|e| csv_err(&path, e))?;
    w.write_record(TRACE_COLUMNS).map_err(|e| csv_err(&path, e))?;
    for t in traces.iter().filter(|t| t.steps() > 0) {
        let scheme = t.scheme.as_str();
        for r in &t.records {
            let row = TraceRow {
                m: r.m,
                scheme,
                err_norm: r.err_norm,
                residual: r.residual,
                ratio: r.ratio,
                matvecs: r.matvecs,
            };
            w.serialize(row).map_err(|e| csv_err(&path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Plain-text CSV writer for the deltoid sample files.
pub fn write_csv<R: Serialize>(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Observed behaviour of one run, as listed in report.txt.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scheme: String,
    pub k: usize,
    pub steps: usize,
    pub matvecs: usize,
    pub final_residual: f64,
    pub final_error: Option<f64>,
    pub window: Option<(usize, usize, f64)>,
    pub mean_ratio_10_20: Option<f64>,
    pub converged: Option<bool>,
}

impl RunSummary {
    pub fn from_trace(t: &ConvergenceTrace, converged: Option<bool>) -> Self {
        let steps = t.steps();
        let (a, b) = (steps / 2, steps);
        let last = t.last();
        Self {
            scheme: t.scheme.to_string(),
            k: t.k,
            steps,
            matvecs: t.total_matvecs(),
            final_residual: last.map_or(f64::NAN, |r| r.residual),
            final_error: last.and_then(|r| r.err_norm),
            window: t.window_rate(a, b).map(|r| (a, b, r)),
            mean_ratio_10_20: t.mean_ratio(10, 20),
            converged,
        }
    }
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "run {}: k={} steps={} matvecs={} residual={:e}",
            self.scheme, self.k, self.steps, self.matvecs, self.final_residual
        )?;
        if let Some(e) = self.final_error {
            write!(f, " error={e:e}")?;
        }
        if let Some((a, b, r)) = self.window {
            write!(f, " rate[{a},{b}]={r:.6}")?;
        }
        if let Some(r) = self.mean_ratio_10_20 {
            write!(f, " mean_ratio[10,20]={r:.6}")?;
        }
        if let Some(c) = self.converged {
            write!(f, " converged={c}")?;
        }
        Ok(())
    }
}

/// `config: <json>` line followed by the given sections.
pub fn compose_report(config_json: &str, sections: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "config: {config_json}");
    for sec in sections {
        s.push_str(sec);
        if !sec.ends_with('\n') {
            s.push('\n');
        }
    }
    s
}
