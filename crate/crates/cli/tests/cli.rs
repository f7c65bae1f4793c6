use std::path::PathBuf;
use std::process::{Command, Output};

use num_traits::Signed;
use serde_json::{json, Value};

use tarski_core::instances::{random_herringbone_any, HerringboneInstance};
use tarski_core::{GridBox, GridPoint, SolverKind};
use tarski_games::rational::{q, qi};
use tarski_games::stochastic::{ShapleyInstance, ShapleyRoute, SsgInstance, SsgPlanOptions, VertexKind};
use tarski_games::supermodular::table_game_from_spec;
use tarski_lab::commands::{self, BenchConfig, GenConfig, GenFamily};
use tarski_lab::instance::Instance;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tarski-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("TARSKI_LAB_THREADS").output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str, value: &Value) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-golden");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn swap_table() -> Value {
    json!({ "dims": 1, "sides": [2], "table": [[2], [1]] })
}

#[test]
fn solve_figure_one() {
    let path = scratch("fig1.json", &HerringboneInstance::figure_one().to_json());
    let out = run(&["solve", "--instance", path.to_str().unwrap(), "--solver", "dqy"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["outcome"], "fixed_point");
    assert_eq!(v["point"], json!([2, 2]));
    let (_, expected) = commands::solve(&Instance::load(&path).unwrap(), SolverKind::Dqy, false).unwrap();
    assert_eq!(v, expected);
}

#[test]
fn solve_every_solver_on_figure_one() {
    let path = scratch("fig1-all.json", &HerringboneInstance::figure_one().to_json());
    for solver in ["dqy", "vi", "vi_top", "pls", "binsearch", "ppad"] {
        let out = run(&["solve", "--instance", path.to_str().unwrap(), "--solver", solver]);
        assert_eq!(out.status.code(), Some(0), "{solver}");
        assert_eq!(stdout_json(&out)["point"], json!([2, 2]), "{solver}");
    }
}

#[test]
fn solve_reports_witness_with_exit_two() {
    let path = scratch("swap.json", &swap_table());
    let out = run(&["solve", "--instance", path.to_str().unwrap(), "--solver", "pls"]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["outcome"], "witness");
    assert_eq!(v["pair"]["x"], json!([1]));
    assert_eq!(v["pair"]["y"], json!([2]));
}

#[test]
fn errors_exit_one() {
    assert_eq!(run(&["solve", "--instance", "/nonexistent/instance.json"]).status.code(), Some(1));
    let path = scratch("fig1-bad-solver.json", &HerringboneInstance::figure_one().to_json());
    assert_eq!(run(&["solve", "--instance", path.to_str().unwrap(), "--solver", "magic"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let junk = scratch("junk.json", &json!({ "hello": 1 }));
    assert_eq!(run(&["solve", "--instance", junk.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn solve_dimacs_and_games() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-golden");
    std::fs::create_dir_all(&dir).unwrap();
    let cnf = dir.join("unsat.cnf");
    std::fs::write(&cnf, "c x1 and not x1\np cnf 2 2\n1 0\n-1 0\n").unwrap();
    let out = run(&["solve", "--instance", cnf.to_str().unwrap(), "--solver", "vi"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["point"], json!([5]));

    let bx = GridBox::new(GridPoint::from([1]), GridPoint::from([2])).unwrap();
    // Coordination: both players prefer to match.
    let table = vec![vec![qi(1), qi(0), qi(0), qi(2)], vec![qi(1), qi(0), qi(0), qi(2)]];
    let game = table_game_from_spec(vec![bx.clone(), bx], table).unwrap();
    let path = scratch("coordination.json", &serde_json::to_value(game.spec().unwrap()).unwrap());
    let out = run(&["solve", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["profile"] == json!([1, 1]) || v["profile"] == json!([2, 2]), "{v}");
}

#[test]
fn bench_rows_and_determinism() {
    let args = ["bench", "--solvers", "dqy", "--n", "256", "--trials", "50", "--seed", "11"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "schema_version,instance_id,solver,N,d,queries,wallclock_ms,outcome_kind,seed");
    assert_eq!(lines.len(), 51);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], "1");
        assert!(cols[5].parse::<u64>().unwrap() > 0);
        assert_eq!(cols[6], "");
        assert_eq!(cols[7], "fixed_point");
    }
    let b = bin().args(args).env("TARSKI_LAB_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, b.stdout);

    let cfg = BenchConfig {
        solvers: vec![SolverKind::Dqy],
        ns: vec![256],
        trials: 50,
        seed: 11,
        timing: false,
        paranoid: false,
        threads: Some(2),
    };
    let mut expected = Vec::new();
    commands::bench_csv(&commands::bench(&cfg).unwrap(), &mut expected).unwrap();
    assert_eq!(a.stdout, expected);
}

#[test]
fn bench_on_tiny_grids_and_timing() {
    let out = run(&["bench", "--solvers", "dqy,vi,pls", "--n", "2", "--trials", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.split(',').nth(5).unwrap().parse::<u64>().unwrap() <= 4, "{line}");
    }
    let out = run(&["bench", "--n", "16", "--trials", "2", "--timing"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(6).unwrap().parse::<f64>().is_ok()));
    let bad = bin().args(["bench", "--n", "16"]).env("TARSKI_LAB_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn duel_reports_ok() {
    let out = run(&["duel", "--solver", "dqy", "--n", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["consistency"], "ok");
    let report = tarski_core::adversary::duel(SolverKind::Dqy, 64).unwrap();
    // Through text on both sides, so float parsing rounds the same way.
    let expected: Value = serde_json::from_str(&serde_json::to_string_pretty(&report).unwrap()).unwrap();
    assert_eq!(v, expected);

    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-golden");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("duels.csv");
    let out = run(&["duel", "--solver", "vi", "--n", "16,64", "--trials", "2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("schema_version,solver,N,trial,queries"));
    assert!(rows[1..].iter().all(|r| r.ends_with(",ok")));
    // Same game every trial.
    let q = |r: &str| r.split(',').nth(4).unwrap().to_string();
    assert_eq!(q(rows[1]), q(rows[2]));
}

#[test]
fn gen_herringbone_band() {
    let out = run(&["gen", "herringbone", "--n", "16", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let h: HerringboneInstance = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(h, random_herringbone_any(16, 7).unwrap());
    assert!(h.path.iter().all(|p| (p[0] - p[1]).abs() <= 2));
    let cfg = GenConfig { family: GenFamily::Herringbone, n: 16, dims: 2, seed: 7, actions: 2 };
    assert_eq!(v, commands::generate(&cfg).unwrap());
}

#[test]
fn gen_then_check_round_trips() {
    for family in ["table", "join", "threshold", "herringbone"] {
        let out = run(&["gen", family, "--n", "4", "--dims", "2", "--seed", "3"]);
        let path = scratch(&format!("gen-{family}.json"), &stdout_json(&out));
        let out = run(&["check", "--instance", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{family}");
        assert_eq!(stdout_json(&out)["ok"], true);
    }
    let path = scratch("check-swap.json", &swap_table());
    let out = run(&["check", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["witness"]["x"], json!([1]));
}

#[test]
fn check_game_conditions() {
    let bx = GridBox::new(GridPoint::from([1]), GridPoint::from([2])).unwrap();
    let table = vec![vec![qi(0), qi(1), qi(1), qi(0)], vec![qi(0); 4]];
    let game = table_game_from_spec(vec![bx.clone(), bx], table).unwrap();
    let path = scratch("anti-coordination.json", &serde_json::to_value(game.spec().unwrap()).unwrap());
    let out = run(&["check", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["violation"]["violation"], "increasing_differences");
    assert_eq!(v["reproduced"], true);
}

#[test]
fn ssg_self_loop_has_value_zero() {
    let g = SsgInstance::new(
        vec![SsgInstance::player(VertexKind::Max, &[0, 1]), SsgInstance::sink(VertexKind::ZeroSink)],
        0,
    )
    .unwrap();
    let path = scratch("loop.json", &serde_json::to_value(&g).unwrap());
    let out = run(&["ssg", "--instance", path.to_str().unwrap(), "--eps", "1e-6", "--brute-force"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["value"], "0");
    assert_eq!(v["rounded"][0], "0");
    assert_eq!(v["brute_force"][0], "0");
    let opts = SsgPlanOptions { eps: Some(q(1, 1_000_000)), ..Default::default() };
    let expected = commands::ssg(&g, &opts, SolverKind::Dqy, true).unwrap();
    assert_eq!(v, serde_json::to_value(expected).unwrap());
}

#[test]
fn shapley_single_state() {
    let g = ShapleyInstance::single(qi(1), q(1, 2)).unwrap();
    let path = scratch("shapley1.json", &serde_json::to_value(&g).unwrap());
    for route in ["contraction", "tarski"] {
        let out = run(&["shapley", "--instance", path.to_str().unwrap(), "--eps", "1e-6", "--route", route]);
        assert_eq!(out.status.code(), Some(0), "{route}");
        let v = stdout_json(&out);
        let value = tarski_games::parse_rational(v["value"].as_str().unwrap()).unwrap();
        assert!((value - qi(2)).abs() < q(1, 1_000_000), "{route}");
        let route: ShapleyRoute = route.parse().unwrap();
        assert_eq!(v, commands::shapley(&g, &q(1, 1_000_000), route).unwrap());
    }
}
