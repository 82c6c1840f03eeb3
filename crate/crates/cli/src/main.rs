//! `sympopt`: ground states, gaps and partial spectra of quadratic bosonic
//! Hamiltonians from the command line.

mod commands;
mod config;
mod record;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sympopt::cost::FactorMode;
use sympopt::Error;

use crate::config::{resolve_problem, RunArgs, RunConfig};
use crate::record::ResultRecord;

/// Slack between a recorded and a recomputed energy error, relative to `|E₀|`.
const COMPARE_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "sympopt", version, about = "Symplectic optimization of quadratic bosonic Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize the ground-state energy.
    Solve(RunArgs),
    /// Minimize the single-mode projected cost for the lowest symplectic eigenvalue.
    Gap(RunArgs),
    /// Lowest k symplectic eigenvalues from a sequence of projected minimizations.
    Partial {
        #[arg(short = 'k')]
        k: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Exact symplectic spectrum, ground energy and gap.
    Diagonalize(ProblemArgs),
    /// Compare analytic gradients against central differences.
    Gradcheck {
        #[command(flatten)]
        problem: ProblemArgs,
        /// energy, gap or partial:<k>
        #[arg(long, default_value = "energy")]
        mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturb the analytic gradient; the check must then fail.
        #[arg(long, hide = true)]
        corrupt_gradient: bool,
    },
    /// Recompute the energy error of a finished run from its saved factors.
    Compare {
        #[arg(long)]
        run_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
struct ProblemArgs {
    #[arg(long, num_args = 1..=3)]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "c")]
    c: Option<f64>,
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, default_value = "sympopt-out")]
    out_dir: PathBuf,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn summarize(rec: &ResultRecord) {
    let status = rec.status.map(|s| format!("{s:?}")).unwrap_or_default();
    match (rec.energy, rec.gap, &rec.eigenvalues) {
        (_, _, Some(ev)) => println!("{} eigenvalues {:?} ({status}, {} calls)", rec.task, ev, rec.steps.unwrap_or(0)),
        (Some(e), _, _) if rec.task == "energy" => println!("energy {e:.12} ({status}, {} calls)", rec.steps.unwrap_or(0)),
        (_, Some(g), _) if rec.task == "gap" => println!("gap {g:.12} ({status}, {} calls)", rec.steps.unwrap_or(0)),
        _ => {}
    }
    for m in &rec.errors {
        println!("  {} = {:.3e}", m.name, m.value);
    }
}

fn run_optimizing(run: &RunArgs, task: &str, k: Option<usize>) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(run, task, k)?;
    let records = match &cfg.rho_list {
        Some(rhos) => commands::run_sweep(&cfg, rhos)?,
        None => vec![commands::run_task(&cfg)?],
    };
    for r in &records {
        summarize(r);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(r) => run_optimizing(&r, "energy", None),
        Command::Gap(r) => run_optimizing(&r, "gap", None),
        Command::Partial { k, run } => run_optimizing(&run, "partial", k),
        Command::Diagonalize(p) => {
            let problem = resolve_problem(p.dims, p.rho, p.c, p.file)?;
            let rec = commands::diagonalize(&problem, &p.out_dir)?;
            println!("E0 {:.12}  gap {:.12}", rec.energy.unwrap_or(f64::NAN), rec.gap.unwrap_or(f64::NAN));
            Ok(())
        }
        Command::Gradcheck { problem, mode, seed, corrupt_gradient } => {
            let problem = resolve_problem(problem.dims, problem.rho, problem.c, problem.file)?;
            let mode = FactorMode::parse(&mode)?;
            let rep = commands::gradcheck(&problem, mode, seed, corrupt_gradient)?;
            for (name, v) in ["M1", "M2", "M3"].iter().zip(rep.blocks) {
                println!("{name} max relative deviation {v:.3e}");
            }
            if rep.passed() {
                println!("gradcheck PASS");
                Ok(())
            } else {
                Err(Failure::Numerical(format!("gradcheck FAIL: deviation {:.3e}", rep.worst())))
            }
        }
        Command::Compare { run_dir } => {
            let c = commands::compare(&run_dir)?;
            println!("recorded   {:.6e}", c.recorded);
            println!("recomputed {:.6e}", c.recomputed);
            println!("energy {:.15}  oracle {:.15}", c.energy, c.e0);
            if (c.recorded - c.recomputed).abs() <= COMPARE_TOL * c.e0.abs().max(1.0) {
                println!("compare MATCH");
                Ok(())
            } else {
                Err(Failure::Numerical("recorded and recomputed errors differ".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
