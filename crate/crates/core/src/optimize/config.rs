use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Polak–Ribière+ nonlinear conjugate gradient.
    Cg,
    /// Fixed-rate gradient descent with heavy-ball momentum.
    GdMomentum,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cg" => Ok(Method::Cg),
            "gd_momentum" | "gd" => Ok(Method::GdMomentum),
            _ => Err(Error::Config(format!("unknown method {s:?} (cg | gd_momentum)"))),
        }
    }
}

/// Line search accepting steps that satisfy the strong Wolfe conditions.
/// Trial steps come from cubic interpolation; `shrink` is the backtracking
/// factor used whenever a probe returns a non-finite value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchConfig {
    pub c1: f64,
    pub c2: f64,
    pub shrink: f64,
    pub max_probes: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self { c1: 1e-4, c2: 0.4, shrink: 0.5, max_probes: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Stop once the gradient infinity-norm drops to this value.
    pub tol: f64,
    /// Cap on cost-function calls, line-search probes included.
    pub max_steps: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub line_search: LineSearchConfig,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Cg,
            tol: 1e-5,
            max_steps: 20_000,
            learning_rate: 0.26,
            momentum: 0.95,
            line_search: LineSearchConfig::default(),
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn cg(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Gradient descent with momentum for a fixed number of steps.
    pub fn gd_momentum(learning_rate: f64, momentum: f64, steps: usize) -> Self {
        Self {
            method: Method::GdMomentum,
            tol: 0.0,
            max_steps: steps,
            learning_rate,
            momentum,
            ..Self::default()
        }
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        // gd runs with a fixed step count may disable the gradient test
        if self.tol < 0.0 || (self.method == Method::Cg && self.tol <= 0.0) || !self.tol.is_finite()
        {
            return bad("tol must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        let ls = &self.line_search;
        if !(0.0 < ls.c1 && ls.c1 < ls.c2 && ls.c2 < 1.0) {
            return bad("line search needs 0 < c1 < c2 < 1");
        }
        if !(0.0 < ls.shrink && ls.shrink < 1.0) {
            return bad("line search shrink factor must lie in (0, 1)");
        }
        if ls.max_probes == 0 {
            return bad("line search needs at least one probe");
        }
        Ok(())
    }
}
