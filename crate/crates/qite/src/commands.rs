//! Subcommand definitions and their drivers.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qite_core::mps::TruncationPolicy;
use qite_core::oracle::{brute_force_ground, dense_ite};
use qite_core::ordering::OrderingKind;
use qite_core::problem::{estimate_market, gen_3regular, gen_er, gen_sk, PortfolioSpec, WeightedGraph};
use qite_core::solver::{network_for, solve, SolveReport, SolverConfig};
use qite_core::swap_network::Architecture;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::prices::PriceTable;
use crate::problem_file::{Instance, Problem, ProblemFile, Provenance};
use crate::report::{write_entropy_csv, write_steps_csv};
use crate::sweep::{self, SweepGrid};

#[derive(Debug, Parser)]
#[command(name = "qite", version, about = "Imaginary-time MPS solver for Ising and QUBO problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a problem instance as JSON.
    Generate(GenerateArgs),
    /// Solve one problem file.
    Solve(SolveArgs),
    /// Solve a set of problems over a parameter grid.
    Sweep(SweepArgs),
    /// Exact ground state by enumeration, optionally with a dense ITE trace.
    Oracle(OracleArgs),
    /// Bond entropy matrices from solve reports.
    EntropyReport(EntropyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    #[value(name = "3reg")]
    ThreeRegular,
    Er,
    Sk,
    Portfolio,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub kind: GenerateKind,
    /// Number of vertices (graph families).
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability for `er`.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Embed the exact ground cost (enumeration, n ≤ 24).
    #[arg(long)]
    pub reference: bool,
    #[command(flatten)]
    pub portfolio: PortfolioArgs,
}

#[derive(Debug, Args)]
pub struct PortfolioArgs {
    #[arg(long, default_value_t = 2)]
    pub assets: usize,
    #[arg(long, default_value_t = 2)]
    pub times: usize,
    #[arg(long, default_value_t = 2)]
    pub bits: usize,
    /// Risk aversion γ.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Proportional transaction cost ν.
    #[arg(long, default_value_t = 0.01)]
    pub nu: f64,
    /// Budget penalty ρ.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Total funds K; defaults to 2^bits − 1.
    #[arg(long)]
    pub funds: Option<f64>,
    /// Price history CSV; the bundled synthetic table when omitted.
    #[arg(long)]
    pub prices: Option<PathBuf>,
    #[arg(long)]
    pub interval: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
}

fn parse_arch(s: &str) -> Result<Architecture, String> {
    s.parse().map_err(|e: qite_core::Error| e.to_string())
}

fn parse_ordering(s: &str) -> Result<OrderingKind, String> {
    s.parse().map_err(|e: qite_core::Error| e.to_string())
}

/// Settings shared by `solve` and `sweep`.
#[derive(Debug, Args)]
pub struct EvolutionArgs {
    /// Imaginary time step Δτ.
    #[arg(long, default_value_t = 1.0)]
    pub dtau: f64,
    /// Maximum number of ITE steps.
    #[arg(long, default_value_t = 30)]
    pub steps: usize,
    /// Samples drawn per step.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Stop once the sample variance drops below this fraction of the initial one.
    #[arg(long, default_value_t = 1e-3)]
    pub stop_ratio: f64,
    /// Relative singular value cutoff.
    #[arg(long, default_value_t = 1e-12)]
    pub cutoff: f64,
}

impl EvolutionArgs {
    fn base(&self, chi: usize) -> CliResult<SolverConfig> {
        Ok(SolverConfig {
            delta_tau: self.dtau,
            n_step_max: self.steps,
            n_samples: self.samples,
            truncation: TruncationPolicy::new(chi, self.cutoff)?,
            stop_ratio: self.stop_ratio,
            ..SolverConfig::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub chi: usize,
    #[arg(long, default_value = "tsn", value_parser = parse_arch)]
    pub arch: Architecture,
    #[arg(long, default_value = "spectral", value_parser = parse_ordering)]
    pub ordering: OrderingKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed for shuffled ordering; defaults to `--seed`.
    #[arg(long)]
    pub ordering_seed: Option<u64>,
    #[command(flatten)]
    pub evolution: EvolutionArgs,
    /// Also write the gate schedule with logical annotations.
    #[arg(long)]
    pub dump_schedule: bool,
    #[arg(long, default_value = "qite-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(required = true)]
    pub problems: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub chi: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "tsn", value_parser = parse_arch)]
    pub arch: Vec<Architecture>,
    #[arg(long, value_delimiter = ',', default_value = "spectral", value_parser = parse_ordering)]
    pub ordering: Vec<OrderingKind>,
    /// Number of seeds per cell.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// First seed; cells use `seed .. seed + seeds`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub evolution: EvolutionArgs,
    #[arg(long, default_value = "qite-sweep")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub problem: PathBuf,
    /// Dense ITE steps to record alongside the ground state (n ≤ 14).
    #[arg(long, default_value_t = 0)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub dtau: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(long, default_value = "qite-entropy")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Solve(a) => solve_cmd(&a),
        Command::Sweep(a) => sweep_cmd(&a),
        Command::Oracle(a) => oracle_cmd(&a),
        Command::EntropyReport(a) => entropy_cmd(&a),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn create_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn require_n(n: Option<usize>, kind: &str) -> CliResult<usize> {
    n.ok_or_else(|| CliError::Config(format!("generate {kind} needs --n")))
}

fn graph_problem(g: &WeightedGraph) -> Problem {
    Problem::Maxcut { n: g.n(), edges: g.edges().to_vec() }
}

pub fn portfolio_spec(args: &PortfolioArgs) -> CliResult<PortfolioSpec> {
    let table = match &args.prices {
        Some(path) => PriceTable::load(path)?,
        None => PriceTable::synthetic(),
    };
    let table = table.first_assets(args.assets)?;
    let market = estimate_market(&table.prices, args.times, args.interval, args.window)?;
    let spec = PortfolioSpec {
        assets: args.assets,
        times: args.times,
        bits: args.bits,
        funds: args.funds,
        risk_aversion: args.gamma,
        transaction_cost: args.nu,
        budget_penalty: args.rho,
        returns: market.returns,
        covariances: market.covariances,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn generate(args: &GenerateArgs) -> CliResult<()> {
    let start = Instant::now();
    let (problem, generator) = match args.kind {
        GenerateKind::ThreeRegular => (graph_problem(&gen_3regular(require_n(args.n, "3reg")?, args.seed)?), "3reg"),
        GenerateKind::Er => (graph_problem(&gen_er(require_n(args.n, "er")?, args.p, args.seed)?), "er"),
        GenerateKind::Sk => (graph_problem(&gen_sk(require_n(args.n, "sk")?, args.seed)?), "sk"),
        GenerateKind::Portfolio => {
            let spec = portfolio_spec(&args.portfolio)?;
            (Problem::Portfolio { n: spec.n_vars(), spec }, "portfolio")
        }
    };
    let reference_cost = if args.reference {
        let (model, _) = problem.to_ising()?;
        Some(brute_force_ground(&model)?.0)
    } else {
        None
    };
    let file = ProblemFile {
        problem,
        reference_cost,
        source: Some(Provenance { generator: generator.into(), seed: args.seed }),
    };
    create_parent(&args.out)?;
    crate::json::write(&args.out, &file)?;

    let mut manifest = RunManifest::new(
        "generate",
        json!({
            "kind": generator,
            "n": args.n,
            "p": args.p,
            "reference": args.reference,
        }),
    );
    if args.kind == GenerateKind::Portfolio {
        if let Some(p) = &args.portfolio.prices {
            manifest.add_input(p)?;
        }
    }
    manifest.seeds.push(args.seed);
    manifest.add_output(&args.out);
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    let dir = args.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let stem = args.out.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
    crate::json::write(&dir.join(format!("{stem}.manifest.json")), &manifest)?;
    println!("wrote {} ({} variables)", args.out.display(), file.problem.n());
    Ok(())
}

fn load_instance(path: &Path) -> CliResult<Instance> {
    ProblemFile::load(path)?.instance()
}

/// Runs the solver without touching the filesystem.
pub fn solve_instance(inst: &Instance, args: &SolveArgs) -> CliResult<(SolverConfig, SolveReport)> {
    let cfg = SolverConfig {
        architecture: args.arch,
        ordering: args.ordering,
        ordering_seed: args.ordering_seed.unwrap_or(args.seed),
        hierarchy: inst.hierarchy(),
        seed: args.seed,
        ..args.evolution.base(args.chi)?
    };
    cfg.validate()?;
    if cfg.ordering == OrderingKind::Hierarchical && cfg.hierarchy.is_none() {
        return Err(CliError::Config("hierarchical ordering needs a portfolio problem".into()));
    }
    let mut report = solve(&inst.model, &cfg, inst.reference_cost)?;
    if let Some(spec) = &inst.portfolio {
        report.annotate_portfolio(spec)?;
    }
    Ok((cfg, report))
}

pub fn solve_cmd(args: &SolveArgs) -> CliResult<()> {
    let start = Instant::now();
    let inst = load_instance(&args.problem)?;
    let (cfg, report) = solve_instance(&inst, args)?;

    create_dir(&args.out)?;
    let mut manifest = RunManifest::new("solve", to_value(&cfg));
    manifest.add_input(&args.problem)?;
    manifest.seeds = vec![cfg.seed, cfg.ordering_seed];

    let report_path = args.out.join("report.json");
    crate::json::write(&report_path, &report)?;
    manifest.add_output(&report_path);
    let steps_path = args.out.join("steps.csv");
    write_steps_csv(&steps_path, &report)?;
    manifest.add_output(&steps_path);
    if args.dump_schedule {
        let schedule = network_for(cfg.architecture, report.n)?.relabeled(&report.ordering.site_to_logical())?;
        let path = args.out.join("schedule.json");
        crate::json::write(&path, &schedule)?;
        manifest.add_output(&path);
    }
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    manifest.write(&args.out)?;

    if let qite_core::solver::SolveStatus::Failed { message } = &report.status {
        return Err(CliError::Numerical(format!(
            "run failed after {} steps: {message}; partial report in {}",
            report.steps_run(),
            report_path.display()
        )));
    }
    let ar = report.approximation_ratio.map(|a| format!(", AR {a}")).unwrap_or_default();
    println!("best cost {}{ar} after {} steps", report.best_cost, report.steps_run());
    Ok(())
}

pub fn sweep_cmd(args: &SweepArgs) -> CliResult<()> {
    let start = Instant::now();
    let threads = sweep::threads_from_env()?;
    let grid = SweepGrid {
        chis: args.chi.clone(),
        architectures: args.arch.clone(),
        orderings: args.ordering.clone(),
        seeds: (args.seed..args.seed.saturating_add(args.seeds)).collect(),
        base: args.evolution.base(args.chi.first().copied().unwrap_or(1))?,
    };
    let mut instances = Vec::with_capacity(args.problems.len());
    for path in &args.problems {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("problem").to_string();
        instances.push((name, load_instance(path)?));
    }
    grid.validate(&instances)?;

    let runs = sweep::run_sweep(&instances, &grid, threads)?;
    let cells = sweep::aggregate(&runs);
    let summary = sweep::summarize(&cells);

    create_dir(&args.out)?;
    let mut manifest = RunManifest::new(
        "sweep",
        json!({
            "chi": grid.chis,
            "arch": grid.architectures,
            "ordering": grid.orderings,
            "base": to_value(&grid.base),
        }),
    );
    for p in &args.problems {
        manifest.add_input(p)?;
    }
    manifest.seeds = grid.seeds.clone();
    let runs_path = args.out.join("runs.csv");
    sweep::write_runs_csv(&runs_path, &runs)?;
    let cells_path = args.out.join("sweep.csv");
    sweep::write_cells_csv(&cells_path, &cells)?;
    let summary_path = args.out.join("summary.csv");
    sweep::write_summary_csv(&summary_path, &summary)?;
    for p in [&runs_path, &cells_path, &summary_path] {
        manifest.add_output(p);
    }
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    manifest.write(&args.out)?;

    let failures = runs.iter().filter(|r| r.failed()).count();
    println!("{} runs, {} cells, {failures} failed", runs.len(), cells.len());
    Ok(())
}

#[derive(Debug, Serialize)]
struct OracleOutput {
    n: usize,
    ground_cost: f64,
    ground_bitstring: Vec<u8>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    dense_energies: Vec<f64>,
}

pub fn oracle_cmd(args: &OracleArgs) -> CliResult<()> {
    let inst = load_instance(&args.problem)?;
    if !(args.dtau > 0.0 && args.dtau.is_finite()) {
        return Err(CliError::Config(format!("--dtau {} must be positive", args.dtau)));
    }
    let (ground_cost, ground_bitstring) = brute_force_ground(&inst.model)?;
    let dense_energies = if args.steps > 0 {
        dense_ite(&inst.model, args.dtau, args.steps, true)?.iter().map(|s| s.energy(&inst.model)).collect()
    } else {
        Vec::new()
    };
    let out = OracleOutput { n: inst.model.n(), ground_cost, ground_bitstring, dense_energies };
    create_parent(&args.out)?;
    crate::json::write(&args.out, &out)?;
    println!("ground cost {ground_cost}");
    Ok(())
}

pub fn entropy_cmd(args: &EntropyArgs) -> CliResult<()> {
    let start = Instant::now();
    let mut reports = Vec::with_capacity(args.reports.len());
    for path in &args.reports {
        let report: SolveReport = crate::json::read(path)?;
        crate::report::entropy_matrix(&report).map_err(|e| match e {
            CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
            other => other,
        })?;
        reports.push((path, report));
    }
    create_dir(&args.out)?;
    let mut manifest = RunManifest::new("entropy-report", json!({ "reports": args.reports.len() }));
    for (k, (path, report)) in reports.iter().enumerate() {
        manifest.add_input(path)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        let parent = path
            .parent()
            .and_then(|p| p.file_name())
            .and_then(|s| s.to_str())
            .map(|s| format!("{s}_"))
            .unwrap_or_default();
        let out = args.out.join(format!("{k:03}_{parent}{stem}_entropy.csv"));
        write_entropy_csv(&out, report)?;
        manifest.add_output(&out);
    }
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    manifest.write(&args.out)?;
    println!("wrote {} entropy tables to {}", reports.len(), args.out.display());
    Ok(())
}
