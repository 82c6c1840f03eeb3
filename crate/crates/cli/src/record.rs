use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sympopt::optimize::{OptimizerConfig, Status};
use sympopt::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    /// `lattice` or `file`
    pub source: String,
    pub dims: Option<Vec<usize>>,
    pub rho: Option<f64>,
    pub c: Option<f64>,
    pub file: Option<String>,
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub e0: f64,
    pub gap: f64,
    pub spectrum: Vec<f64>,
}

/// One error metric, always tied to what it was measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub reference: String,
    /// Solver gradient tolerance the run stopped at; `None` for fixed-step runs.
    pub solver_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpCountRecord {
    pub products: usize,
    pub max_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub task: String,
    pub problem: ProblemRecord,
    pub optimizer: Option<OptimizerConfig>,
    pub init: Option<String>,
    pub status: Option<Status>,
    pub steps: Option<usize>,
    pub final_cost: Option<f64>,
    /// E₀ estimate for energy runs.
    pub energy: Option<f64>,
    /// `2 × cost` for gap runs.
    pub gap: Option<f64>,
    /// `2 × cost` for k = 1..K in partial runs.
    pub partial_sums: Option<Vec<f64>>,
    /// Successive differences of `partial_sums`.
    pub eigenvalues: Option<Vec<f64>>,
    pub oracle: Option<OracleRecord>,
    pub errors: Vec<Metric>,
    pub op_counts: Option<OpCountRecord>,
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn new(task: &str, problem: ProblemRecord) -> Self {
        Self {
            task: task.to_string(),
            problem,
            optimizer: None,
            init: None,
            status: None,
            steps: None,
            final_cost: None,
            energy: None,
            gap: None,
            partial_sums: None,
            eigenvalues: None,
            oracle: None,
            errors: Vec::new(),
            op_counts: None,
            wall_time_s: 0.0,
        }
    }

    pub fn metric(&mut self, name: &str, value: f64, reference: &str, solver_tol: Option<f64>) {
        self.errors.push(Metric {
            name: name.to_string(),
            value,
            reference: reference.to_string(),
            solver_tol,
        });
    }

    pub fn find_metric(&self, name: &str) -> Option<&Metric> {
        self.errors.iter().find(|m| m.name == name)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
