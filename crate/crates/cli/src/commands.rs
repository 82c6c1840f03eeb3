use std::cell::RefCell;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sympopt::cost::{
    build_l3, covariance, fd_gradient_oracle, successive_differences, FactorMode,
    FactorObjective, Objective, TriangularFactors, FD_REL_TOL, FD_STEP,
};
use sympopt::gaussian::{block_diagonal_ground_cm, symplectic_spectrum, SymplecticSpectrum};
use sympopt::hamiltonian::{build_qdo, load_hamiltonian, LatticeSpec, QuadraticHamiltonian};
use sympopt::matfile::write_mat1;
use sympopt::optimize::{
    init_factors, load_factors, minimize, save_factors, ConvergenceTrace, InitKind, Minimum,
    OptimizerConfig,
};
use sympopt::{ops, Error, Result};

use crate::config::{resolve_problem, Init, Problem, RunConfig, Task};
use crate::record::{OpCountRecord, OracleRecord, ProblemRecord, ResultRecord};

const ORACLE: &str = "symplectic diagonalization";

pub fn build_problem(p: &Problem) -> Result<QuadraticHamiltonian> {
    match p {
        Problem::Lattice(spec) => build_qdo(spec),
        Problem::File(path) => load_hamiltonian(path),
    }
}

fn problem_record(p: &Problem, d: usize) -> ProblemRecord {
    match p {
        Problem::Lattice(s) => ProblemRecord {
            source: "lattice".into(),
            dims: Some(s.dims.clone()),
            rho: Some(s.rho),
            c: Some(s.coupling_c),
            file: None,
            modes: d,
        },
        Problem::File(f) => ProblemRecord {
            source: "file".into(),
            dims: None,
            rho: None,
            c: None,
            file: Some(f.display().to_string()),
            modes: d,
        },
    }
}

fn problem_from_record(r: &ProblemRecord) -> Result<Problem> {
    resolve_problem(r.dims.clone(), r.rho, r.c.filter(|c| *c != 0.0), r.file.as_ref().map(PathBuf::from))
}

fn oracle_record(s: &SymplecticSpectrum) -> OracleRecord {
    OracleRecord { e0: s.e0(), gap: s.gap(), spectrum: s.eps.clone() }
}

fn check_warm_mode(task: Task, stored: FactorMode) -> Result<()> {
    let ok = match (task.mode(), stored) {
        (FactorMode::Gap, FactorMode::Gap) => true,
        (FactorMode::Gap, _) | (_, FactorMode::Gap) => false,
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{} task cannot warm-start from {} factors",
            task.name(),
            stored.label()
        )))
    }
}

fn initial(
    h: &QuadraticHamiltonian,
    mode: FactorMode,
    init: &Init,
    task: Task,
) -> Result<(TriangularFactors, Option<String>)> {
    match init {
        Init::GammaT => Ok((init_factors(h, mode, InitKind::GammaT)?, None)),
        Init::Zero => Ok((init_factors(h, mode, InitKind::Zero)?, None)),
        Init::Warm(dir) => {
            let (f, meta) = load_factors(dir)?;
            check_warm_mode(task, f.mode())?;
            if f.modes() != h.modes() {
                return Err(Error::Dimension(format!(
                    "warm start has d = {}, problem has d = {}",
                    f.modes(),
                    h.modes()
                )));
            }
            let note = format!("{} ({})", dir.display(), meta.provenance);
            Ok((f.convert(mode)?, Some(note)))
        }
    }
}

fn optimize(
    h: &QuadraticHamiltonian,
    start: &TriangularFactors,
    cfg: &OptimizerConfig,
) -> Result<(TriangularFactors, Minimum)> {
    let obj = FactorObjective::new(h, start.clone());
    let m = minimize(&obj, &start.to_params(), cfg)?;
    Ok((start.with_params(&m.x)?, m))
}

fn write_trace(path: &Path, trace: &ConvergenceTrace, timing: bool) -> Result<()> {
    let mut t = trace.clone();
    if !timing {
        for r in &mut t.records {
            r.elapsed_seconds = 0.0;
        }
    }
    fs::write(path, t.to_csv())?;
    Ok(())
}

fn provenance(p: &Problem, task: Task) -> String {
    match p {
        Problem::Lattice(s) => format!("{} run, dims {:?}, rho {}, c {}", task.name(), s.dims, s.rho, s.coupling_c),
        Problem::File(f) => format!("{} run, file {}", task.name(), f.display()),
    }
}

/// Runs one optimizing task and writes its artifacts into `cfg.out_dir`.
pub fn run_task(cfg: &RunConfig) -> Result<ResultRecord> {
    let clock = Instant::now();
    if ops::counting_enabled() {
        ops::reset_counts();
    }
    let h = build_problem(&cfg.problem)?;
    let d = h.modes();
    if let Task::Partial(k) = cfg.task {
        if k == 0 || k > d {
            return Err(Error::SubspaceOutOfRange { k, d });
        }
    }
    fs::create_dir_all(&cfg.out_dir)?;
    let mut rec = ResultRecord::new(cfg.task.name(), problem_record(&cfg.problem, d));
    rec.optimizer = Some(cfg.optimizer.clone());
    rec.init = Some(cfg.init.label());
    let spectrum = if cfg.oracle { Some(symplectic_spectrum(&h)?) } else { None };
    let solver_tol = (cfg.optimizer.tol > 0.0).then_some(cfg.optimizer.tol);

    let (factors, m) = match cfg.task {
        Task::Energy | Task::Gap => {
            let (start, note) = initial(&h, cfg.task.mode(), &cfg.init, cfg.task)?;
            let (f, mut m) = optimize(&h, &start, &cfg.optimizer)?;
            m.trace.provenance = note;
            write_trace(&cfg.out_dir.join("trace.csv"), &m.trace, cfg.timing)?;
            (f, m)
        }
        Task::Partial(k) => {
            let mut sums = Vec::with_capacity(k);
            let mut last = None;
            for j in 1..=k {
                let (start, note) = initial(&h, FactorMode::Partial(j), &cfg.init, cfg.task)?;
                let (f, mut m) = optimize(&h, &start, &cfg.optimizer)?;
                m.trace.provenance = note;
                write_trace(&cfg.out_dir.join(format!("trace_k{j}.csv")), &m.trace, cfg.timing)?;
                sums.push(2.0 * m.cost);
                last = Some((f, m));
            }
            let est = successive_differences(&sums);
            if let Some(s) = &spectrum {
                let worst = est.iter().zip(&s.eps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                rec.metric("max_eigenvalue_error", worst, ORACLE, solver_tol);
                let sum_err = (sums[k - 1] - s.partial_sum(k)).abs();
                rec.metric("partial_sum_error", sum_err, ORACLE, solver_tol);
            }
            rec.partial_sums = Some(sums);
            rec.eigenvalues = Some(est);
            last.expect("k >= 1")
        }
    };

    rec.status = Some(m.trace.status);
    rec.steps = Some(m.trace.calls());
    rec.final_cost = Some(m.cost);
    save_factors(cfg.out_dir.join("factors"), &factors, &provenance(&cfg.problem, cfg.task))?;

    match cfg.task {
        Task::Energy => {
            rec.energy = Some(m.cost);
            let gamma = covariance(&factors)?;
            write_mat1(cfg.out_dir.join("gamma.mat"), &gamma)?;
            if let Some(s) = &spectrum {
                rec.metric("energy_abs", (m.cost - s.e0()).abs(), ORACLE, solver_tol);
                rec.metric("spectrum_frobenius", spectrum_distance(&h, &factors, s)?, ORACLE, solver_tol);
                if let Some(v) = h.block_v() {
                    let sd = block_diagonal_ground_cm(v)?;
                    rec.metric("cm_frobenius", (&gamma - sd.matrix()).norm(), ORACLE, solver_tol);
                    let dx = (gamma.view((0, 0), (d, d)) - sd.position_block()).amax();
                    let dp = (gamma.view((d, d), (d, d)) - sd.momentum_block()).amax();
                    rec.metric("max_position_block_error", dx, ORACLE, solver_tol);
                    rec.metric("max_momentum_block_error", dp, ORACLE, solver_tol);
                }
            }
        }
        Task::Gap => {
            rec.gap = Some(2.0 * m.cost);
            if let Some(s) = &spectrum {
                rec.metric("gap_residual", 2.0 * m.cost - s.gap(), ORACLE, solver_tol);
            }
        }
        Task::Partial(_) => {}
    }
    rec.oracle = spectrum.as_ref().map(oracle_record);
    if ops::counting_enabled() {
        let c = ops::counts();
        rec.op_counts = Some(OpCountRecord { products: c.products, max_dim: c.max_dim });
    }
    rec.wall_time_s = if cfg.timing { clock.elapsed().as_secs_f64() } else { 0.0 };
    rec.save(&cfg.out_dir.join("result.json"))?;
    Ok(rec)
}

/// Sorted ordinary eigenvalues of `L₃HL₃ᵀ` against each `εᵢ` twice.
fn spectrum_distance(
    h: &QuadraticHamiltonian,
    f: &TriangularFactors,
    s: &SymplecticSpectrum,
) -> Result<f64> {
    let l = build_l3(f)?;
    let c = &l * h.matrix() * l.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut got: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    got.sort_by(|a, b| a.total_cmp(b));
    let want = s.eps.iter().flat_map(|e| [*e, *e]);
    Ok(got.iter().zip(want).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

/// `--rho-list`: one run per ρ in its own subdirectory, each warm-started
/// from the factors of the previous run.
pub fn run_sweep(cfg: &RunConfig, rhos: &[f64]) -> Result<Vec<ResultRecord>> {
    let Problem::Lattice(base) = &cfg.problem else {
        return Err(Error::Config("--rho-list needs a lattice problem".into()));
    };
    let mut out = Vec::with_capacity(rhos.len());
    let mut init = cfg.init.clone();
    for rho in rhos {
        let mut run = cfg.clone();
        run.problem = Problem::Lattice(LatticeSpec { rho: *rho, ..base.clone() });
        run.out_dir = cfg.out_dir.join(format!("rho_{rho}"));
        run.init = init.clone();
        out.push(run_task(&run)?);
        init = Init::Warm(run.out_dir.join("factors"));
    }
    Ok(out)
}

pub fn diagonalize(problem: &Problem, out_dir: &Path) -> Result<ResultRecord> {
    let h = build_problem(problem)?;
    let s = symplectic_spectrum(&h)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("spectrum.csv"), s.to_csv())?;
    if let Some(v) = h.block_v() {
        write_mat1(out_dir.join("gamma_sd.mat"), block_diagonal_ground_cm(v)?.matrix())?;
    }
    let mut rec = ResultRecord::new("diagonalize", problem_record(problem, h.modes()));
    rec.energy = Some(s.e0());
    rec.gap = Some(s.gap());
    rec.oracle = Some(oracle_record(&s));
    rec.save(&out_dir.join("result.json"))?;
    Ok(rec)
}

pub struct GradcheckReport {
    /// Largest relative deviation per block: `M₁` (or `m₁`), `M₂`, `M₃`.
    pub blocks: [f64; 3],
}

impl GradcheckReport {
    pub fn worst(&self) -> f64 {
        self.blocks.iter().cloned().fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.worst() <= FD_REL_TOL
    }
}

/// Analytic versus central-difference gradients at seeded random factors.
/// `corrupt` perturbs the first analytic entry, as a negative control.
pub fn gradcheck(problem: &Problem, mode: FactorMode, seed: u64, corrupt: bool) -> Result<GradcheckReport> {
    let h = build_problem(problem)?;
    let d = h.modes();
    if d > 8 {
        return Err(Error::Config(format!("gradcheck is limited to d <= 8, problem has d = {d}")));
    }
    let mut f = TriangularFactors::zeros(d, mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..f.num_params()).map(|_| rng.random_range(-0.4..0.4)).collect();
    f.set_params(&x)?;
    let obj = FactorObjective::new(&h, f.clone());
    let (_, mut g) = obj.value_grad(&x)?;
    if corrupt {
        g[0] = g[0] * 1.01 + 1e-3;
    }
    let fd_err = RefCell::new(None);
    let fd = fd_gradient_oracle(
        |p| match obj.value(p) {
            Ok(v) => v,
            Err(e) => {
                fd_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        &x,
        FD_STEP,
    );
    if let Some(e) = fd_err.into_inner() {
        return Err(e);
    }
    let n1 = x.len() - 2 * d * (d + 1) / 2;
    let n2 = d * (d + 1) / 2;
    let bounds = [(0, n1), (n1, n1 + n2), (n1 + n2, x.len())];
    let mut blocks = [0.0; 3];
    for (b, (lo, hi)) in bounds.iter().enumerate() {
        blocks[b] = sympopt::cost::max_relative_deviation(&g[*lo..*hi], &fd[*lo..*hi]);
    }
    Ok(GradcheckReport { blocks })
}

pub struct Comparison {
    pub recorded: f64,
    pub recomputed: f64,
    pub energy: f64,
    pub e0: f64,
}

/// Recomputes `|E₀ − E₀^SD|` from the persisted factors of an energy run.
pub fn compare(run_dir: &Path) -> Result<Comparison> {
    let rec = ResultRecord::load(&run_dir.join("result.json"))?;
    if rec.task != "energy" {
        return Err(Error::Config(format!("compare needs an energy run, found {:?}", rec.task)));
    }
    let problem = problem_from_record(&rec.problem)?;
    let h = build_problem(&problem)?;
    let (f, _) = load_factors(run_dir.join("factors"))?;
    let energy = sympopt::cost::energy_cost(&f, &h)?;
    let e0 = symplectic_spectrum(&h)?.e0();
    let recorded = match rec.find_metric("energy_abs") {
        Some(m) => m.value,
        None => (rec.energy.ok_or_else(|| Error::Config("result has no energy".into()))? - e0).abs(),
    };
    Ok(Comparison { recorded, recomputed: (energy - e0).abs(), energy, e0 })
}
