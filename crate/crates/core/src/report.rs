//! Solver reports, written as JSON lines: one `iteration` record per sweep
//! followed by a single `summary` record.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    RcTol,
    MaxIters,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// One-based.
    pub iteration: usize,
    /// Observed-entry fit `½‖P(model) − P(t)‖²` after the iteration.
    pub objective: f64,
    /// Relative change of the estimate.
    pub rc: f64,
    /// Seconds since the solver started.
    pub elapsed_s: f64,
}

/// Quality of a final estimate against a reference.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ssim: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub iterations: Vec<IterationRecord>,
    pub wall_seconds: f64,
    pub termination: Termination,
    /// Ranks used by the solver (flattened bond vector or per-split ranks).
    pub ranks: Vec<usize>,
    #[serde(default)]
    pub metrics: Metrics,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Iteration(IterationRecord),
    Summary {
        solver: String,
        iterations: usize,
        termination: Termination,
        wall_seconds: f64,
        final_rc: Option<f64>,
        ranks: Vec<usize>,
        #[serde(flatten)]
        metrics: Metrics,
    },
}

impl SolveReport {
    pub fn final_rc(&self) -> Option<f64> {
        self.iterations.last().map(|r| r.rc)
    }

    pub fn write_json_lines<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for rec in &self.iterations {
            serde_json::to_writer(&mut w, &Line::Iteration(rec.clone()))?;
            w.write_all(b"\n")?;
        }
        let summary = Line::Summary {
            solver: self.solver.clone(),
            iterations: self.iterations.len(),
            termination: self.termination,
            wall_seconds: self.wall_seconds,
            final_rc: self.final_rc(),
            ranks: self.ranks.clone(),
            metrics: self.metrics.clone(),
        };
        serde_json::to_writer(&mut w, &summary)?;
        w.write_all(b"\n")?;
        w.flush()
    }

    pub fn to_json_lines(&self) -> String {
        let mut buf = Vec::new();
        self.write_json_lines(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let mut iterations = Vec::new();
        for (k, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let parsed: Line = serde_json::from_str(line)
                .map_err(|e| Error::Argument(format!("report line {}: {e}", k + 1)))?;
            match parsed {
                Line::Iteration(rec) => iterations.push(rec),
                Line::Summary {
                    solver,
                    termination,
                    wall_seconds,
                    ranks,
                    metrics,
                    ..
                } => {
                    return Ok(Self {
                        solver,
                        iterations,
                        wall_seconds,
                        termination,
                        ranks,
                        metrics,
                    })
                }
            }
        }
        Err(Error::Argument("report has no summary line".into()))
    }
}

/// `‖x − prev‖ / ‖prev‖`; 0 when both are zero and 1 when only `prev` is.
pub fn relative_change(diff_norm: f64, prev_norm: f64) -> f64 {
    if prev_norm > 0.0 {
        diff_norm / prev_norm
    } else if diff_norm > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Accumulates iteration records against a start time.
pub(crate) struct Recorder {
    start: Instant,
    pub records: Vec<IterationRecord>,
}

impl Recorder {
    pub fn start() -> Self {
        Self {
            start: Instant::now(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, objective: f64, rc: f64) {
        self.records.push(IterationRecord {
            iteration: self.records.len() + 1,
            objective,
            rc,
            elapsed_s: self.start.elapsed().as_secs_f64(),
        });
    }

    pub fn finish(self, solver: &str, termination: Termination, ranks: Vec<usize>) -> SolveReport {
        SolveReport {
            solver: solver.to_string(),
            wall_seconds: self.start.elapsed().as_secs_f64(),
            iterations: self.records,
            termination,
            ranks,
            metrics: Metrics::default(),
        }
    }
}
