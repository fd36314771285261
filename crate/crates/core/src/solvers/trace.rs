use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeTag {
    Basic,
    Classical,
    Generalized,
}

impl SchemeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeTag::Basic => "basic",
            SchemeTag::Classical => "classical",
            SchemeTag::Generalized => "generalized",
        }
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// State after step `m`. `matvecs` is cumulative; residual evaluation is
/// telemetry and not counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub m: usize,
    pub err_norm: Option<f64>,
    pub residual: f64,
    /// `err_m / err_{m-1}` when errors are known, else the residual ratio.
    pub ratio: Option<f64>,
    pub matvecs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub scheme: SchemeTag,
    pub k: usize,
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn new(scheme: SchemeTag, k: usize) -> Self {
        Self { scheme, k, records: Vec::new() }
    }

    pub(crate) fn push(&mut self, m: usize, err_norm: Option<f64>, residual: f64, matvecs: usize) {
        let ratio = self.records.last().and_then(|prev| match (err_norm, prev.err_norm) {
            (Some(e), Some(p)) => (p > 0.0).then(|| e / p),
            _ => (prev.residual > 0.0).then(|| residual / prev.residual),
        });
        self.records.push(TraceRecord { m, err_norm, residual, ratio, matvecs });
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn steps(&self) -> usize {
        self.records.last().map_or(0, |r| r.m)
    }

    pub fn total_matvecs(&self) -> usize {
        self.records.last().map_or(0, |r| r.matvecs)
    }

    /// Matvecs spent on step `m` alone.
    pub fn matvecs_at(&self, m: usize) -> Option<usize> {
        if m == 0 {
            return None;
        }
        let cur = self.records.iter().find(|r| r.m == m)?;
        let prev = self.records.iter().find(|r| r.m == m - 1)?;
        Some(cur.matvecs - prev.matvecs)
    }

    pub fn error_at(&self, m: usize) -> Option<f64> {
        self.records.iter().find(|r| r.m == m)?.err_norm
    }

    /// Error norm if tracked, else residual norm, at step `m`.
    fn measure_at(&self, m: usize) -> Option<f64> {
        let r = self.records.iter().find(|r| r.m == m)?;
        Some(r.err_norm.unwrap_or(r.residual))
    }

    /// Average contraction over steps `from..=to`:
    /// `(e_to / e_from)^(1 / (to - from))`.
    pub fn window_rate(&self, from: usize, to: usize) -> Option<f64> {
        if to <= from {
            return None;
        }
        let a = self.measure_at(from)?;
        let b = self.measure_at(to)?;
        (a > 0.0).then(|| (b / a).powf(1.0 / (to - from) as f64))
    }

    /// Arithmetic mean of the recorded ratios at steps `from..=to`.
    pub fn mean_ratio(&self, from: usize, to: usize) -> Option<f64> {
        let ratios: Vec<f64> =
            self.records.iter().filter(|r| r.m >= from && r.m <= to).filter_map(|r| r.ratio).collect();
        (!ratios.is_empty() && ratios.len() == to + 1 - from).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64)
    }
}
