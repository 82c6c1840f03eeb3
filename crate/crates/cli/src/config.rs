use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use sympopt::cost::FactorMode;
use sympopt::hamiltonian::LatticeSpec;
use sympopt::optimize::{Method, OptimizerConfig};
use sympopt::{Error, Result};

/// Flags shared by the optimizing subcommands. Anything left unset falls back
/// to the `--config` file, then to the task default.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Lattice extent per axis (x, then y, then z).
    #[arg(long, num_args = 1..=3)]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Diagonal position-momentum coupling.
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// Hamiltonian matrix in MAT1 format instead of a lattice.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    /// gamma_t, zero, or warm:<dir>
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub warm_path: Option<PathBuf>,
    /// Also run exact symplectic diagonalization and report errors.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Chain runs over these ρ values, each warm-started from the previous one.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub rho_list: Option<Vec<f64>>,
    /// Write zeros for elapsed times so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dims: Option<Vec<usize>>,
    pub rho: Option<f64>,
    pub c: Option<f64>,
    pub file: Option<PathBuf>,
    pub task: Option<String>,
    pub k: Option<usize>,
    pub method: Option<String>,
    pub tol: Option<f64>,
    pub max_steps: Option<usize>,
    pub learning_rate: Option<f64>,
    pub momentum: Option<f64>,
    pub init: Option<String>,
    pub warm_path: Option<PathBuf>,
    pub oracle: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub rho_list: Option<Vec<f64>>,
    pub timing: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Energy,
    Gap,
    Partial(usize),
}

impl Task {
    pub fn mode(&self) -> FactorMode {
        match self {
            Task::Energy => FactorMode::Energy,
            Task::Gap => FactorMode::Gap,
            Task::Partial(k) => FactorMode::Partial(*k),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::Energy => "energy",
            Task::Gap => "gap",
            Task::Partial(_) => "partial",
        }
    }

    fn default_optimizer(&self) -> OptimizerConfig {
        match self {
            Task::Energy => OptimizerConfig::cg(1e-5),
            Task::Gap => OptimizerConfig::gd_momentum(0.26, 0.95, 400),
            Task::Partial(_) => OptimizerConfig::cg(1e-7),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Lattice(LatticeSpec),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    GammaT,
    Zero,
    Warm(PathBuf),
}

impl Init {
    pub fn label(&self) -> String {
        match self {
            Init::GammaT => "gamma_t".into(),
            Init::Zero => "zero".into(),
            Init::Warm(p) => format!("warm:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    pub task: Task,
    pub optimizer: OptimizerConfig,
    pub init: Init,
    pub oracle: bool,
    pub out_dir: PathBuf,
    pub rho_list: Option<Vec<f64>>,
    pub timing: bool,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Resolves the problem source from flags and file; exactly one is allowed.
pub fn resolve_problem(
    dims: Option<Vec<usize>>,
    rho: Option<f64>,
    c: Option<f64>,
    file: Option<PathBuf>,
) -> Result<Problem> {
    match (dims, file) {
        (Some(_), Some(_)) => Err(usage("give either --dims/--rho or --file, not both")),
        (None, Some(f)) => {
            if rho.is_some() || c.is_some() {
                return Err(usage("--rho and --c only apply to lattice problems"));
            }
            Ok(Problem::File(f))
        }
        (Some(dims), None) => {
            let rho = rho.ok_or_else(|| usage("lattice problems need --rho"))?;
            let spec = LatticeSpec::new(&dims, rho).with_coupling(c.unwrap_or(0.0));
            spec.validate()?;
            Ok(Problem::Lattice(spec))
        }
        (None, None) => Err(usage("no problem given: use --dims with --rho, or --file")),
    }
}

fn parse_task(name: &str, k: Option<usize>) -> Result<Task> {
    match name {
        "energy" | "solve" => Ok(Task::Energy),
        "gap" => Ok(Task::Gap),
        "partial" => Ok(Task::Partial(k.ok_or_else(|| usage("partial task needs -k"))?)),
        other => Err(usage(format!("task {other:?} cannot be run from a config (energy | gap | partial)"))),
    }
}

impl RunConfig {
    /// Merges flags over the config file. `task` is the subcommand name;
    /// the partial subcommand takes `k` from `-k` or the file.
    pub fn resolve(args: &RunArgs, task: &str, k_flag: Option<usize>) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        if let Some(ft) = &file.task {
            if parse_task(ft, Some(1))?.name() != parse_task(task, Some(1))?.name() {
                return Err(usage(format!("config task {ft:?} conflicts with the {task} subcommand")));
            }
        }
        let task = parse_task(task, k_flag.or(file.k))?;

        let problem = resolve_problem(
            args.dims.clone().or(file.dims),
            args.rho.or(file.rho),
            args.c.or(file.c),
            args.file.clone().or(file.file),
        )?;

        let mut opt = task.default_optimizer();
        if let Some(m) = args.method.as_ref().or(file.method.as_ref()) {
            let method: Method = m.parse()?;
            if method != opt.method {
                opt = match method {
                    Method::Cg => OptimizerConfig::cg(1e-5),
                    Method::GdMomentum => OptimizerConfig::gd_momentum(0.26, 0.95, 400),
                };
            }
        }
        if let Some(v) = args.tol.or(file.tol) {
            opt.tol = v;
        }
        if let Some(v) = args.max_steps.or(file.max_steps) {
            opt.max_steps = v;
        }
        if let Some(v) = args.learning_rate.or(file.learning_rate) {
            opt.learning_rate = v;
        }
        if let Some(v) = args.momentum.or(file.momentum) {
            opt.momentum = v;
        }
        if let Some(v) = args.seed.or(file.seed) {
            opt.seed = v;
        }
        opt.validate()?;

        let warm_path = args.warm_path.clone().or(file.warm_path);
        let init = match args.init.as_ref().or(file.init.as_ref()).map(String::as_str) {
            None if warm_path.is_some() => Init::Warm(warm_path.unwrap()),
            None | Some("gamma_t") => Init::GammaT,
            Some("zero") => Init::Zero,
            Some("warm") => Init::Warm(warm_path.ok_or_else(|| usage("init warm needs --warm-path"))?),
            Some(s) => match s.strip_prefix("warm:") {
                Some(p) => Init::Warm(PathBuf::from(p)),
                None => return Err(usage(format!("unknown init {s:?} (gamma_t | zero | warm:<dir>)"))),
            },
        };

        let rho_list = args.rho_list.clone().or(file.rho_list);
        if rho_list.is_some() && !matches!(problem, Problem::Lattice(_)) {
            return Err(usage("--rho-list needs a lattice problem"));
        }
        Ok(Self {
            problem,
            task,
            optimizer: opt,
            init,
            oracle: args.oracle || file.oracle.unwrap_or(false),
            out_dir: args.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from("sympopt-out")),
            rho_list,
            timing: !args.no_timing && file.timing.unwrap_or(true),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice_args() -> RunArgs {
        RunArgs { dims: Some(vec![2]), rho: Some(2.0), ..Default::default() }
    }

    #[test]
    fn task_defaults() {
        let c = RunConfig::resolve(&lattice_args(), "gap", None).unwrap();
        assert_eq!(c.optimizer.method, Method::GdMomentum);
        assert_eq!(c.optimizer.max_steps, 400);
        let c = RunConfig::resolve(&lattice_args(), "energy", None).unwrap();
        assert_eq!(c.optimizer.tol, 1e-5);
        assert_eq!(c.init, Init::GammaT);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"dims": [3], "rho": 1.9, "tol": 1e-6, "init": "zero", "oracle": true}"#).unwrap();
        let args = RunArgs { config: Some(p), tol: Some(1e-8), ..Default::default() };
        let c = RunConfig::resolve(&args, "energy", None).unwrap();
        assert_eq!(c.optimizer.tol, 1e-8);
        assert_eq!(c.init, Init::Zero);
        assert!(c.oracle);
        assert_eq!(c.problem, Problem::Lattice(LatticeSpec::new(&[3], 1.9)));
    }

    #[test]
    fn rejects_ambiguous_problem_and_unknown_keys() {
        let args = RunArgs { file: Some("h.mat".into()), ..lattice_args() };
        assert!(RunConfig::resolve(&args, "energy", None).is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"dims": [3], "rho": 1.9, "tolerance": 1}"#).unwrap();
        let args = RunArgs { config: Some(p), ..Default::default() };
        assert!(RunConfig::resolve(&args, "energy", None).is_err());
    }

    #[test]
    fn warm_init_forms() {
        let args = RunArgs { init: Some("warm:/tmp/f".into()), ..lattice_args() };
        let c = RunConfig::resolve(&args, "energy", None).unwrap();
        assert_eq!(c.init, Init::Warm("/tmp/f".into()));
        let args = RunArgs { warm_path: Some("/tmp/g".into()), ..lattice_args() };
        let c = RunConfig::resolve(&args, "energy", None).unwrap();
        assert_eq!(c.init, Init::Warm("/tmp/g".into()));
    }

    #[test]
    fn partial_needs_k() {
        assert!(RunConfig::resolve(&lattice_args(), "partial", None).is_err());
        let c = RunConfig::resolve(&lattice_args(), "partial", Some(2)).unwrap();
        assert_eq!(c.task, Task::Partial(2));
    }
}
