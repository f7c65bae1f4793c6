use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use tarski_core::SolverKind;
use tarski_games::stochastic::{ShapleyInstance, ShapleyRoute, SsgInstance, SsgPlanOptions};
use tarski_games::{parse_rational, Q};
use tarski_lab::commands::{self, BenchConfig, DuelRow, GenConfig, GenFamily};
use tarski_lab::instance::Instance;
use tarski_lab::{CliError, Result};

#[derive(Parser)]
#[command(name = "tarski-lab", version, about = "Tarski fixed points: solvers, instances, benchmarks and games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance; exit 0 on a fixed point, 2 on a witness.
    Solve(SolveArgs),
    /// Query counts on random herringbones as CSV.
    Bench(BenchArgs),
    /// Run solvers against the path-counting adversary.
    Duel(DuelArgs),
    /// Write a random instance.
    Gen(GenArgs),
    /// Value of a simple stochastic game through the discretized map.
    Ssg(SsgArgs),
    /// Values of a discounted Shapley game.
    Shapley(ShapleyArgs),
    /// Monotonicity of a grid instance, or the lattice conditions of a game;
    /// exit 2 on a violation.
    Check(CheckArgs),
}

#[derive(Args)]
struct JsonOut {
    /// Write JSON here instead of standard output.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    #[arg(long, default_value = "dqy", value_parser = parse_solver)]
    solver: SolverKind,
    /// Cross-check comparable queries and report violations.
    #[arg(long)]
    paranoid: bool,
    #[command(flatten)]
    out: JsonOut,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "dqy", value_parser = parse_solver)]
    solvers: Vec<SolverKind>,
    #[arg(long = "n", value_delimiter = ',', required = true)]
    ns: Vec<i64>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fill the wallclock_ms column (breaks byte-identical reruns).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    paranoid: bool,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct DuelArgs {
    #[arg(long, default_value = "dqy", value_parser = parse_solver)]
    solver: SolverKind,
    #[arg(long = "n", value_delimiter = ',', required = true)]
    ns: Vec<i64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Summary rows as CSV; the full reports still go to --json.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    out: JsonOut,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Herringbone,
    Table,
    Join,
    Threshold,
    Ssg,
    Shapley,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    family: FamilyArg,
    /// Grid side, SSG vertex count or Shapley state count.
    #[arg(long = "n")]
    n: i64,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, default_value_t = 2)]
    actions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: JsonOut,
}

#[derive(Args)]
struct SsgArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    #[arg(long, value_parser = parse_q)]
    eps: Option<Q>,
    #[arg(long, value_parser = parse_q)]
    beta: Option<Q>,
    #[arg(long)]
    grid_side: Option<i64>,
    #[arg(long)]
    denominator_bound: Option<u64>,
    #[arg(long, default_value = "dqy", value_parser = parse_solver)]
    solver: SolverKind,
    /// Also report the exact values by strategy enumeration.
    #[arg(long)]
    brute_force: bool,
    #[command(flatten)]
    out: JsonOut,
}

#[derive(Args)]
struct ShapleyArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    #[arg(long, default_value = "1e-6", value_parser = parse_q)]
    eps: Q,
    #[arg(long, default_value = "contraction", value_parser = parse_route)]
    route: ShapleyRoute,
    #[command(flatten)]
    out: JsonOut,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    /// Probe budget for the game conditions before sampling kicks in.
    #[arg(long, default_value_t = 1 << 20)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: JsonOut,
}

fn parse_solver(s: &str) -> std::result::Result<SolverKind, String> {
    s.parse().map_err(|e: tarski_core::Error| e.to_string())
}

fn parse_q(s: &str) -> std::result::Result<Q, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn parse_route(s: &str) -> std::result::Result<ShapleyRoute, String> {
    s.parse().map_err(|e: tarski_games::Error| e.to_string())
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn emit_json(value: &Value, out: &JsonOut) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match &out.json {
        Some(path) => writeln!(create(path)?, "{text}").map_err(|e| CliError::io(path.display().to_string(), e)),
        None => writeln!(std::io::stdout().lock(), "{text}").map_err(|e| CliError::io("stdout", e)),
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve(a) => {
            let instance = Instance::load(&a.instance)?;
            let (outcome, value) = commands::solve(&instance, a.solver, a.paranoid)?;
            emit_json(&value, &a.out)?;
            Ok(commands::outcome_status(&outcome))
        }
        Command::Bench(a) => {
            let cfg = BenchConfig {
                solvers: a.solvers,
                ns: a.ns,
                trials: a.trials,
                seed: a.seed,
                timing: a.timing,
                paranoid: a.paranoid,
                threads: commands::threads_from_env()?,
            };
            let rows = commands::bench(&cfg)?;
            match &a.csv {
                Some(path) => commands::bench_csv(&rows, create(path)?)?,
                None => commands::bench_csv(&rows, std::io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::Duel(a) => {
            let reports = commands::duels(a.solver, &a.ns, a.trials, commands::threads_from_env()?)?;
            if let Some(path) = &a.csv {
                let rows: Vec<DuelRow> = reports.iter().map(|(t, r)| DuelRow::new(r, *t)).collect();
                commands::write_csv(&rows, create(path)?)?;
            }
            let value = match reports.as_slice() {
                [(_, r)] => serde_json::to_value(r)?,
                many => serde_json::to_value(many.iter().map(|(_, r)| r).collect::<Vec<_>>())?,
            };
            if a.csv.is_none() || a.out.json.is_some() {
                emit_json(&value, &a.out)?;
            }
            Ok(if reports.iter().all(|(_, r)| r.is_ok()) { 0 } else { 1 })
        }
        Command::Gen(a) => {
            let family = match a.family {
                FamilyArg::Herringbone => GenFamily::Herringbone,
                FamilyArg::Table => GenFamily::Table,
                FamilyArg::Join => GenFamily::Join,
                FamilyArg::Threshold => GenFamily::Threshold,
                FamilyArg::Ssg => GenFamily::Ssg,
                FamilyArg::Shapley => GenFamily::Shapley,
            };
            let cfg = GenConfig { family, n: a.n, dims: a.dims, seed: a.seed, actions: a.actions };
            emit_json(&commands::generate(&cfg)?, &a.out)?;
            Ok(0)
        }
        Command::Ssg(a) => {
            let inst = SsgInstance::load(&a.instance)?;
            let opts = SsgPlanOptions {
                eps: a.eps,
                beta: a.beta,
                grid_side: a.grid_side,
                denominator_bound: a.denominator_bound,
            };
            let report = commands::ssg(&inst, &opts, a.solver, a.brute_force)?;
            emit_json(&serde_json::to_value(&report)?, &a.out)?;
            Ok(0)
        }
        Command::Shapley(a) => {
            let inst = ShapleyInstance::load(&a.instance)?;
            emit_json(&commands::shapley(&inst, &a.eps, a.route)?, &a.out)?;
            Ok(0)
        }
        Command::Check(a) => {
            let instance = Instance::load(&a.instance)?;
            let (value, violated) = commands::check(&instance, a.budget, a.seed)?;
            emit_json(&value, &a.out)?;
            Ok(if violated { 2 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1 like every other error; 2 is reserved for witnesses.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) if closed_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// A reader such as `head` went away; not worth an error.
fn closed_pipe(e: &CliError) -> bool {
    let io = match e {
        CliError::Io { source, .. } => Some(source),
        CliError::Csv(c) => match c.kind() {
            csv::ErrorKind::Io(source) => Some(source),
            _ => None,
        },
        _ => None,
    };
    io.is_some_and(|s| s.kind() == std::io::ErrorKind::BrokenPipe)
}
