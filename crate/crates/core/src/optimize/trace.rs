use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::matfile::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    StepCap,
    LineSearchFailure,
}

/// One cost-function call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub cost: f64,
    pub grad_norm: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<StepRecord>,
    pub status: Status,
    pub provenance: Option<String>,
}

impl ConvergenceTrace {
    pub fn calls(&self) -> usize {
        self.records.len()
    }

    pub fn best_cost(&self) -> Option<f64> {
        self.records.iter().map(|r| r.cost).min_by(|a, b| a.total_cmp(b))
    }

    /// First call whose cost is within `threshold` above `reference`.
    pub fn calls_to_reach(&self, reference: f64, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.cost - reference < threshold)
            .map(|r| r.step)
    }

    /// `step,cost,grad_norm,elapsed_s`, preceded by a `#` provenance line
    /// when one is set. Elapsed time is wall clock and so is the one column
    /// that is not reproducible between runs.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        if let Some(p) = &self.provenance {
            s.push_str(&format!("# warm start: {p}\n"));
        }
        s.push_str("step,cost,grad_norm,elapsed_s\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.step,
                fmt_f64(r.cost),
                fmt_f64(r.grad_norm),
                fmt_f64(r.elapsed_seconds)
            ));
        }
        s
    }
}

pub(crate) struct Recorder {
    start: Instant,
    pub records: Vec<StepRecord>,
}

impl Recorder {
    pub fn new() -> Self {
        Self { start: Instant::now(), records: Vec::new() }
    }

    pub fn push(&mut self, cost: f64, grad_norm: f64) {
        let step = self.records.len() + 1;
        self.records.push(StepRecord {
            step,
            cost,
            grad_norm,
            elapsed_seconds: self.start.elapsed().as_secs_f64(),
        });
    }
}
