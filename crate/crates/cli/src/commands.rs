//! The subcommands as library calls. Each returns the JSON (or records)
//! the binary prints, so tests can compare the two directly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use tarski_core::adversary::{duel, Classification, DuelReport};
use tarski_core::instances::{random_herringbone_any, random_monotone_mixed};
use tarski_core::{check_monotone_exhaustive, GridShape, Oracle, Outcome, SolveOutcome, SolverKind};
use tarski_games::rational::{format_rational, serde_q};
use tarski_games::stochastic::catalog::random_ssg;
use tarski_games::stochastic::{
    random_shapley, shapley_solve, ssg_brute_force, ssg_solve_tarski_with, PrecisionPlan, ShapleyInstance,
    ShapleyRoute, SsgInstance, SsgPlanOptions, SsgSolution,
};
use tarski_games::supermodular::check_c2_c3_seeded;
use tarski_games::{beta_bar_oracle, BestResponseKind, Q};

use crate::error::{CliError, Result};
use crate::instance::Instance;

pub const SCHEMA_VERSION: u32 = 1;

/// Exit status for a solver outcome: 0 for a fixed point, 2 for a witness.
pub fn outcome_status(outcome: &SolveOutcome) -> u8 {
    match outcome.outcome {
        Outcome::FixedPoint(_) => 0,
        Outcome::Witness(_) => 2,
    }
}

pub fn solve(instance: &Instance, solver: SolverKind, paranoid: bool) -> Result<(SolveOutcome, Value)> {
    if let Instance::Game(game) = instance {
        let mut oracle = beta_bar_oracle(game, BestResponseKind::Sup);
        let bx = oracle.full_box().clone();
        let out = solver.run(&mut oracle, &bx, paranoid).map_err(tarski_games::Error::from)?;
        let mut value = serde_json::to_value(&out)?;
        if let Outcome::FixedPoint(p) = &out.outcome {
            value["profile"] = serde_json::to_value(game.from_grid(p))?;
        }
        return Ok((out, value));
    }
    let mut oracle = Oracle::new(instance.grid_fn()?.expect("grid instance"));
    let bx = oracle.full_box().clone();
    let out = solver.run(&mut oracle, &bx, paranoid)?;
    let value = serde_json::to_value(&out)?;
    Ok((out, value))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub schema_version: u32,
    pub instance_id: String,
    pub solver: SolverKind,
    #[serde(rename = "N")]
    pub n: i64,
    pub d: usize,
    pub queries: u64,
    /// Blank unless timing was requested, so reruns stay byte-identical.
    pub wallclock_ms: Option<f64>,
    pub outcome_kind: &'static str,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub solvers: Vec<SolverKind>,
    pub ns: Vec<i64>,
    pub trials: usize,
    pub seed: u64,
    pub timing: bool,
    pub paranoid: bool,
    pub threads: Option<usize>,
}

/// The seed of trial `trial` at side `n`; a splitmix64 finalizer over the
/// base seed so neighbouring trials get unrelated instances.
pub fn instance_seed(base: u64, n: i64, trial: usize) -> u64 {
    let mut z = base
        .wrapping_add((n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add((trial as u64).wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Worker count from `TARSKI_LAB_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("TARSKI_LAB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(CliError::Usage(format!("TARSKI_LAB_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        b = b.num_threads(k);
    }
    b.build().map_err(|e| CliError::Usage(format!("cannot start workers: {e}")))
}

/// One row per (solver, N, trial) on random herringbones, in that order.
pub fn bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if cfg.ns.iter().any(|&n| n < 1) {
        return Err(CliError::Usage("--n values must be positive".into()));
    }
    let tasks: Vec<(SolverKind, i64, usize)> = cfg
        .solvers
        .iter()
        .flat_map(|&s| cfg.ns.iter().flat_map(move |&n| (0..cfg.trials).map(move |t| (s, n, t))))
        .collect();
    let run = |&(solver, n, trial): &(SolverKind, i64, usize)| -> Result<BenchRecord> {
        let seed = instance_seed(cfg.seed, n, trial);
        let inst = random_herringbone_any(n, seed)?;
        let mut oracle = Oracle::new(inst.oracle()?);
        let bx = oracle.full_box().clone();
        let start = std::time::Instant::now();
        let out = solver.run(&mut oracle, &bx, cfg.paranoid)?;
        let elapsed = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
        Ok(BenchRecord {
            schema_version: SCHEMA_VERSION,
            instance_id: format!("herringbone-n{n}-t{trial}"),
            solver,
            n,
            d: 2,
            queries: out.queries,
            wallclock_ms: cfg.timing.then_some(elapsed),
            outcome_kind: out.kind(),
            seed,
        })
    };
    pool(cfg.threads)?.install(|| tasks.par_iter().map(run).collect())
}

pub fn write_csv<T: Serialize, W: std::io::Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io("csv output", e))?;
    Ok(())
}

/// `write_csv` with a header even when there are no rows.
pub fn bench_csv<W: std::io::Write>(rows: &[BenchRecord], mut out: W) -> Result<()> {
    if rows.is_empty() {
        writeln!(out, "schema_version,instance_id,solver,N,d,queries,wallclock_ms,outcome_kind,seed")
            .map_err(|e| CliError::io("csv output", e))?;
        return Ok(());
    }
    write_csv(rows, out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DuelRow {
    pub schema_version: u32,
    pub solver: SolverKind,
    #[serde(rename = "N")]
    pub n: i64,
    pub trial: usize,
    pub queries: u64,
    pub decisive: usize,
    pub short: usize,
    pub non_decisive: usize,
    pub forced: usize,
    pub potential_violations: usize,
    pub replay_mismatches: usize,
    pub consistency: String,
}

impl DuelRow {
    pub fn new(report: &DuelReport, trial: usize) -> Self {
        let count = |c: Classification| report.transcript.iter().filter(|r| r.classification == c).count();
        DuelRow {
            schema_version: SCHEMA_VERSION,
            solver: report.solver,
            n: report.n,
            trial,
            queries: report.queries,
            decisive: count(Classification::Decisive),
            short: count(Classification::Short),
            non_decisive: count(Classification::NonDecisive),
            forced: count(Classification::Forced),
            potential_violations: report.potential_violations,
            replay_mismatches: report.replay_mismatches,
            consistency: report.consistency.clone(),
        }
    }
}

/// Duels in (N, trial) order. The adversary is deterministic, so trials
/// repeat the same game; they exist to check exactly that.
pub fn duels(solver: SolverKind, ns: &[i64], trials: usize, threads: Option<usize>) -> Result<Vec<(usize, DuelReport)>> {
    let tasks: Vec<(i64, usize)> = ns.iter().flat_map(|&n| (0..trials).map(move |t| (n, t))).collect();
    pool(threads)?.install(|| {
        tasks.par_iter().map(|&(n, t)| Ok((t, duel(solver, n)?))).collect::<Result<Vec<_>>>()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenFamily {
    Herringbone,
    Table,
    Join,
    Threshold,
    Ssg,
    Shapley,
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub family: GenFamily,
    pub n: i64,
    pub dims: usize,
    pub seed: u64,
    pub actions: usize,
}

pub fn generate(cfg: &GenConfig) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let table = |index: usize, rng: &mut ChaCha8Rng| -> Result<Value> {
        let shape = GridShape::uniform(cfg.dims, cfg.n)?;
        Ok(random_monotone_mixed(&shape, index, rng).to_json())
    };
    match cfg.family {
        GenFamily::Herringbone => Ok(random_herringbone_any(cfg.n, cfg.seed)?.to_json()),
        GenFamily::Table => table(0, &mut rng),
        GenFamily::Join => table(1, &mut rng),
        GenFamily::Threshold => table(2, &mut rng),
        GenFamily::Ssg => {
            let n = usize::try_from(cfg.n).map_err(|_| CliError::Usage("--n must be non-negative".into()))?;
            Ok(serde_json::to_value(random_ssg(n, &mut rng))?)
        }
        GenFamily::Shapley => {
            let n = usize::try_from(cfg.n).ok().filter(|&n| n > 0);
            let n = n.ok_or_else(|| CliError::Usage("--n must be positive".into()))?;
            if cfg.actions == 0 {
                return Err(CliError::Usage("--actions must be positive".into()));
            }
            Ok(serde_json::to_value(random_shapley(n, cfg.actions, &mut rng))?)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SsgReport {
    pub start: usize,
    /// Rounded value of the start vertex.
    #[serde(with = "serde_q")]
    pub value: Q,
    #[serde(flatten)]
    pub solution: SsgSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force: Option<Vec<String>>,
}

pub fn ssg(inst: &SsgInstance, opts: &SsgPlanOptions, solver: SolverKind, brute_force: bool) -> Result<SsgReport> {
    let plan = PrecisionPlan::for_ssg(inst, opts)?;
    let solution = ssg_solve_tarski_with(inst, &plan, solver)?;
    let brute_force = if brute_force {
        Some(ssg_brute_force(inst)?.iter().map(format_rational).collect())
    } else {
        None
    };
    Ok(SsgReport { start: inst.start, value: solution.rounded[inst.start].clone(), solution, brute_force })
}

pub fn shapley(inst: &ShapleyInstance, eps: &Q, route: ShapleyRoute) -> Result<Value> {
    let s = shapley_solve(inst, eps, route)?;
    let mut v = serde_json::to_value(&s)?;
    v["start"] = json!(inst.start);
    v["value"] = json!(format_rational(&s.values[inst.start]));
    Ok(v)
}

/// Monotonicity for grid instances, the lattice conditions for games.
/// Returns the report and whether a violation was found.
pub fn check(instance: &Instance, budget: usize, seed: u64) -> Result<(Value, bool)> {
    if let Instance::Game(game) = instance {
        return Ok(match check_c2_c3_seeded(game, budget, seed) {
            None => (json!({ "check": "supermodular", "ok": true }), false),
            Some(v) => {
                let reproduced = v.reproduces(game)?;
                let report = json!({
                    "check": "supermodular",
                    "ok": false,
                    "violation": v,
                    "message": v.to_string(),
                    "reproduced": reproduced,
                });
                (report, true)
            }
        });
    }
    let mut oracle = Oracle::new(instance.grid_fn()?.expect("grid instance"));
    let bx = oracle.full_box().clone();
    Ok(match check_monotone_exhaustive(&mut oracle, &bx)? {
        None => (json!({ "check": "monotone", "ok": true, "queries": oracle.queries() }), false),
        Some(w) => (json!({ "check": "monotone", "ok": false, "witness": w, "queries": oracle.queries() }), true),
    })
}
