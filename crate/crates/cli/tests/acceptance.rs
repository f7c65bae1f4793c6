//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every expected value comes from an independent check here
//! (enumeration, exact arithmetic), not from the code under test.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tarski_core::adversary::{duel, replay_mismatches, Classification, DuelReport};
use tarski_core::instances::{
    exhaustive_monotone_catalog, herringbone_random, random_herringbone_any, random_join, random_monotone_mixed,
    random_monotone_table, sat_lfp_instance, CnfFormula, HerringboneDistributionParams,
};
use tarski_core::simplicial::{barycentric_in, pl_eval, pl_eval_in, ppad_route_solve_traced, Simplex};
use tarski_core::{
    brute_force_fix, check_monotone_exhaustive, dqy_solve, value_iteration, FixSet, GridBox, GridFn, GridPoint,
    GridShape, IterationDirection, Oracle, SolverKind, TableFn,
};
use tarski_games::rational::{q, qi, Q};
use tarski_games::stochastic::catalog::{random_ssg, ssg_catalog};
use tarski_games::stochastic::{
    random_shapley, shapley_solve, shapley_value_map, ssg_brute_force, ssg_discounted_map, ssg_solve_tarski,
    PrecisionPlan, ShapleyInstance, ShapleyRoute, SsgInstance, SsgPlanOptions, VertexKind,
};
use tarski_games::{
    beta_bar_oracle, diamond_search, game_from_monotone, pure_equilibria, solve_equilibrium, BestResponseKind,
    SupermodularGame,
};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ceil_log2(n: i64) -> u64 {
    64 - (n as u64 - 1).leading_zeros() as u64
}

fn rng_for(base: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ i as u64)
}

fn full<F: GridFn>(o: &Oracle<F>) -> GridBox {
    o.full_box().clone()
}

fn fix_set(f: &TableFn) -> Result<FixSet, String> {
    let mut o = Oracle::new(f.clone());
    let bx = full(&o);
    brute_force_fix(&mut o, &bx).map_err(|e| e.to_string())
}

fn sq3() -> GridShape {
    GridShape::uniform(2, 3).unwrap()
}

/// The catalog of [3]^2 plus `per_shape` mixed-family functions on each of
/// [4]^2 and [3]^3.
fn criterion_one_instances(per_shape: usize) -> Vec<TableFn> {
    let mut all: Vec<TableFn> = exhaustive_monotone_catalog(&sq3()).collect();
    for (s, shape) in [GridShape::uniform(2, 4).unwrap(), GridShape::uniform(3, 3).unwrap()].iter().enumerate() {
        let generated: Vec<TableFn> = (0..per_shape)
            .into_par_iter()
            .map(|i| random_monotone_mixed(shape, i, &mut rng_for(100 + s as u64, i)))
            .collect();
        all.extend(generated);
    }
    all
}

// 1. Solver agreement against brute force.

fn solver_agreement(instances: &[TableFn]) -> Check {
    let catalog = instances.iter().filter(|f| f.shape() == &sq3()).count();
    instances.par_iter().enumerate().try_for_each(|(i, f)| -> Result<(), String> {
        let mut o = Oracle::new(f.clone());
        let bx = full(&o);
        let mono = check_monotone_exhaustive(&mut o, &bx).map_err(|e| e.to_string())?;
        ensure!(mono.is_none(), "instance {i} is not monotone: {mono:?}");
        let fix = fix_set(f)?;
        for kind in SolverKind::ALL {
            let mut o = Oracle::new(f.clone());
            let out = kind.run(&mut o, &bx, false).map_err(|e| format!("{kind} on instance {i}: {e}"))?;
            match out.fixed_point() {
                Some(p) if fix.contains(p) => {}
                _ => return Err(format!("{kind} on instance {i} returned {:?}", out.outcome)),
            }
        }
        Ok(())
    })?;
    Ok(format!(
        "{} functions ({catalog} catalog on [3]^2, {} random on [4]^2 and [3]^3), solvers {}",
        instances.len(),
        instances.len() - catalog,
        SolverKind::ALL.map(|k| k.to_string()).join(",")
    ))
}

// 2. Step and query bounds.

fn bounds(instances: &[TableFn]) -> Check {
    let worst_vi = instances
        .par_iter()
        .map(|f| -> Result<u64, String> {
            let d = f.shape().dims() as u64;
            let n = f.shape().sides()[0] as u64;
            let bound = d * (n - 1) + 1;
            let fix = fix_set(f)?;
            let mut worst = 0;
            for (dir, expected) in [(IterationDirection::FromBottom, &fix.lfp), (IterationDirection::FromTop, &fix.gfp)] {
                let mut o = Oracle::new(f.clone());
                let bx = full(&o);
                let out = value_iteration(&mut o, &bx, dir).map_err(|e| e.to_string())?;
                ensure!(out.fixed_point() == Some(expected), "VI {dir:?} missed the extreme fixed point");
                ensure!(out.queries <= bound, "VI used {} > {bound} steps", out.queries);
                worst = worst.max(out.queries);
            }
            Ok(worst)
        })
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))?;

    let mut cases = Vec::new();
    for d in 1..=3usize {
        for k in [4u32, 6, 8, 10, 12] {
            for i in 0..12 {
                cases.push((d, k, i));
            }
        }
    }
    let worst_ratio = cases
        .par_iter()
        .map(|&(d, k, i)| -> Result<f64, String> {
            let n = 1i64 << k;
            let bound = (ceil_log2(n) + 2).pow(d as u32);
            let shape = GridShape::uniform(d, n).unwrap();
            let mut rng = rng_for(200 + (d as u64) * 16 + k as u64, i);
            let check = |o: &mut dyn FnMut() -> Result<(GridPoint, bool, u64), String>| -> Result<u64, String> {
                let (p, fixed, queries) = o()?;
                ensure!(fixed, "d={d} N={n}: {p} is not fixed");
                ensure!(queries <= bound, "d={d} N={n}: {queries} > {bound} queries");
                Ok(queries)
            };
            // Alternate lazily generated families; tables only where they fit.
            let queries = match (i % 3, d) {
                (1, 1) => check(&mut || solve_dqy(random_monotone_table(&shape, &mut rng))),
                (1, 2) => check(&mut || solve_dqy(random_herringbone_any(n, i as u64).unwrap().oracle().unwrap())),
                _ => {
                    let count = rng.gen_range(1..=8);
                    check(&mut || solve_dqy(random_join(&shape, count, &mut rng)))
                }
            }?;
            Ok(queries as f64 / bound as f64)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(format!(
        "VI worst {worst_vi} steps within d(N-1)+1 on {} functions; dqy on {} instances up to N=2^12, d<=3, worst {:.0}% of bound",
        instances.len(),
        cases.len(),
        worst_ratio * 100.0
    ))
}

fn solve_dqy<F: GridFn>(f: F) -> Result<(GridPoint, bool, u64), String> {
    let mut o = Oracle::new(f);
    let bx = full(&o);
    let out = dqy_solve(&mut o, &bx, false).map_err(|e| e.to_string())?;
    let p = out.fixed_point().ok_or("dqy returned a witness on a monotone input")?.clone();
    let fixed = o.query(&p).map_err(|e| e.to_string())? == p;
    Ok((p, fixed, out.queries))
}

// 3. Lower-bound evidence.

fn lower_bound_evidence(duels: &[DuelReport]) -> Check {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for k in [4u32, 6, 8, 10] {
        let n = 1i64 << k;
        let queries: Vec<u64> = (0..100u64)
            .into_par_iter()
            .map(|seed| -> Result<u64, String> {
                let h = herringbone_random(HerringboneDistributionParams::new(n, seed)).map_err(|e| e.to_string())?;
                let (p, fixed, queries) = solve_dqy(h.oracle().map_err(|e| e.to_string())?)?;
                ensure!(fixed && p == GridPoint::from(h.fixed_point), "N={n} seed={seed}: wrong fixed point {p}");
                Ok(queries)
            })
            .collect::<Result<_, _>>()?;
        let mean = queries.iter().sum::<u64>() as f64 / queries.len() as f64;
        let x = (k * k) as f64;
        ensure!(mean >= x / 8.0, "N={n}: mean {mean} < log^2 N / 8 = {}", x / 8.0);
        points.push((x, mean));
        labels.push(format!("N={n}: {mean:.1}"));
    }
    // Least squares through the origin; R^2 against the mean-centred total.
    let a = points.iter().map(|(x, y)| x * y).sum::<f64>() / points.iter().map(|(x, _)| x * x).sum::<f64>();
    let ybar = points.iter().map(|(_, y)| y).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points.iter().map(|(x, y)| (y - a * x).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - ybar).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    ensure!(r2 >= 0.9, "R^2 = {r2:.4} < 0.9 (a = {a:.4}, means {points:?})");

    let mut answers = 0;
    for r in duels {
        let n = r.n;
        let w = (n as f64).sqrt() as i64;
        ensure!(r.potential_violations == 0, "{} N={n}: {} reported violations", r.solver, r.potential_violations);
        for (t, rec) in r.transcript.iter().enumerate() {
            let (before, after) = (&rec.paths_before, &rec.paths_after);
            // L' >= L/2 - 1, L' >= L - 2 and L' >= L - w log N, exponentiated.
            let holds = match rec.classification {
                Classification::Decisive => after * after * 4u32 >= *before,
                Classification::NonDecisive => after * 4u32 >= *before,
                Classification::Short => after * num_bigint_pow(n as u64, w as u32) >= *before,
                Classification::Forced => after == before,
            };
            ensure!(holds, "{} N={n} answer {t}: {:?} {before} -> {after}", r.solver, rec.classification);
            answers += 1;
        }
    }
    Ok(format!(
        "mean dqy queries [{}] fit {a:.3}*log^2 N with R^2 = {r2:.4}; {answers} answers over {} duels satisfy the potential",
        labels.join(", "),
        duels.len()
    ))
}

fn num_bigint_pow(base: u64, exp: u32) -> num_bigint::BigUint {
    num_bigint::BigUint::from(base).pow(exp)
}

fn run_duels() -> Result<Vec<DuelReport>, String> {
    let mut plan: Vec<(SolverKind, i64)> = Vec::new();
    for n in [16i64, 64, 256] {
        plan.extend(SolverKind::ALL.iter().map(|&s| (s, n)));
    }
    plan.extend([(SolverKind::Dqy, 1024), (SolverKind::Binsearch, 1024)]);
    plan.par_iter().map(|&(s, n)| duel(s, n).map_err(|e| format!("{s} N={n}: {e}"))).collect()
}

// 4. Adversary soundness.

fn adversary_soundness(duels: &[DuelReport]) -> Check {
    for r in duels {
        let replay = replay_mismatches(&r.extracted_instance, &r.transcript).map_err(|e| e.to_string())?;
        ensure!(replay == 0 && r.replay_mismatches == 0, "{} N={}: {replay} replay mismatches", r.solver, r.n);
        let mut o = Oracle::new(r.extracted_instance.oracle().map_err(|e| e.to_string())?);
        for rec in &r.transcript {
            let fx = o.query(&rec.query).map_err(|e| e.to_string())?;
            ensure!(fx == rec.answer, "{} N={}: f({}) = {fx}, adversary said {}", r.solver, r.n, rec.query, rec.answer);
        }
        let claimed = r.outcome.fixed_point().ok_or_else(|| format!("{} N={}: no fixed point claimed", r.solver, r.n))?;
        ensure!(o.query(claimed).map_err(|e| e.to_string())? == *claimed, "{} N={}: {claimed} not fixed", r.solver, r.n);
        ensure!(*claimed == GridPoint::from(r.extracted_instance.fixed_point), "{} N={}: fixed point differs", r.solver, r.n);
        ensure!(r.fixed_point_consistent && r.is_ok(), "{} N={}: {}", r.solver, r.n, r.consistency);
    }
    let solvers: std::collections::BTreeSet<String> = duels.iter().map(|r| r.solver.to_string()).collect();
    Ok(format!(
        "{} duels ({}) at N in 16..1024 replay with zero mismatches",
        duels.len(),
        solvers.into_iter().collect::<Vec<_>>().join(",")
    ))
}

// 5. PPAD-route structure.

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &h) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, h);
            out.push(p);
        }
    }
    out
}

/// Every simplex of the box containing `x`, by brute enumeration.
fn containing_simplices(x: &[Q], bx: &GridBox) -> Vec<Simplex> {
    let d = x.len();
    let mut bases = vec![Vec::new()];
    for i in 0..d {
        let fl = i64::try_from(x[i].floor().to_integer()).unwrap();
        let mut options = vec![fl];
        if x[i].is_integer() {
            options.push(fl - 1);
        }
        options.retain(|&b| b >= bx.low[i] && b < bx.high[i]);
        bases = bases
            .into_iter()
            .flat_map(|b: Vec<i64>| options.iter().map(move |&o| [b.clone(), vec![o]].concat()))
            .collect();
    }
    let coords: Vec<usize> = (0..d).collect();
    let mut out = Vec::new();
    for b in bases {
        for perm in permutations(&coords) {
            let s = Simplex { base: GridPoint::new(b.clone()), perm };
            if barycentric_in(&s, x).is_some() {
                out.push(s);
            }
        }
    }
    out
}

fn ppad_structure(instances: &[TableFn]) -> Check {
    let extra: Vec<TableFn> = (0..600)
        .into_par_iter()
        .map(|i| random_monotone_mixed(&GridShape::uniform(2, 7).unwrap(), i, &mut rng_for(500, i)))
        .collect();
    let steps = instances
        .par_iter()
        .chain(extra.par_iter())
        .map(|f| -> Result<usize, String> {
            let mut o = Oracle::new(f.clone());
            let bx = full(&o);
            let (out, trace) = ppad_route_solve_traced(&mut o, &bx).map_err(|e| e.to_string())?;
            ensure!(out.fixed_point().is_some(), "ppad returned {:?}", out.outcome);
            for w in trace.windows(2) {
                ensure!(2 * w[1].num_points() <= w[0].num_points(), "{} -> {} does not halve", w[0], w[1]);
                ensure!(w[0].low <= w[1].low && w[1].high <= w[0].high, "{} is not inside {}", w[1], w[0]);
            }
            Ok(trace.len() - 1)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    // The route recurses only when the PL fixed point is fractional, which
    // is rare; draw two-level thresholds until enough instances recurse.
    let mut sampled = 0;
    let mut recursing = 0;
    let mut steps = steps;
    while recursing < 100 {
        ensure!(sampled < 100_000, "only {recursing} of {sampled} threshold instances recurse");
        let batch = (sampled..sampled + 2000)
            .into_par_iter()
            .map(|i| -> Result<usize, String> {
                let (d, n) = [(4, 3), (3, 3), (4, 4)][i % 3];
                let mut rng = rng_for(503, i);
                let mut pt = || GridPoint::new((0..d).map(|_| rng.gen_range(1..=n)).collect());
                let (t, a, b) = (pt(), pt(), pt());
                let b = a.join(&b);
                let f = tarski_core::FnGrid::new(GridShape::uniform(d, n).unwrap(), move |x: &GridPoint| {
                    if *x >= t {
                        b.clone()
                    } else {
                        a.clone()
                    }
                });
                let mut o = Oracle::new(f);
                let bx = full(&o);
                let fix = brute_force_fix(&mut o, &bx).map_err(|e| e.to_string())?;
                let (out, trace) = ppad_route_solve_traced(&mut o, &bx).map_err(|e| e.to_string())?;
                match out.fixed_point() {
                    Some(p) if fix.contains(p) => {}
                    _ => return Err(format!("threshold instance {i}: ppad returned {:?}", out.outcome)),
                }
                for w in trace.windows(2) {
                    ensure!(2 * w[1].num_points() <= w[0].num_points(), "{} -> {} does not halve", w[0], w[1]);
                    ensure!(w[0].low <= w[1].low && w[1].high <= w[0].high, "{} is not inside {}", w[1], w[0]);
                }
                Ok(trace.len() - 1)
            })
            .collect::<Result<Vec<usize>, String>>()?;
        sampled += batch.len();
        recursing += batch.iter().filter(|&&s| s > 0).count();
        steps += batch.iter().sum::<usize>();
    }

    let shape = GridShape::uniform(2, 4).unwrap();
    let pl_funcs = 500;
    (0..pl_funcs).into_par_iter().try_for_each(|i| -> Result<(), String> {
        let f = random_monotone_mixed(&shape, i, &mut rng_for(501, i));
        let mut o = Oracle::new(f.clone());
        let bx = full(&o);
        for p in bx.points() {
            let x: Vec<Q> = p.coords().iter().map(|&c| qi(c)).collect();
            let fx: Vec<Q> = f.get(&p).coords().iter().map(|&c| qi(c)).collect();
            for clamp in [false, true] {
                let y = pl_eval(&mut o, &x, &bx, clamp).map_err(|e| e.to_string())?;
                ensure!(y == fx, "PL at {p} gives {y:?}, f gives {}", f.get(&p));
            }
        }
        Ok(())
    })?;

    let fracs = [q(0, 1), q(1, 2), q(1, 3), q(2, 3), q(1, 4), q(3, 4)];
    let mut rng = ChaCha8Rng::seed_from_u64(502);
    let mut faces = 0;
    for round in 0..1000 {
        let (d, n) = if round % 2 == 0 { (2, 4) } else { (3, 3) };
        let f = random_monotone_mixed(&GridShape::uniform(d, n).unwrap(), round, &mut rng);
        let mut o = Oracle::new(f);
        let bx = full(&o);
        // Tie two fractional parts, or land on an integer, to sit on a shared face.
        let shared = fracs[rng.gen_range(0..fracs.len())].clone();
        let x: Vec<Q> = (0..d)
            .map(|i| {
                let fr = if i < 2 { shared.clone() } else { fracs[rng.gen_range(0..fracs.len())].clone() };
                qi(rng.gen_range(1..n)) + fr
            })
            .collect();
        let simplices = containing_simplices(&x, &bx);
        ensure!(simplices.len() >= 2, "{x:?} is interior to a single simplex");
        for clamp in [false, true] {
            let reference = pl_eval(&mut o, &x, &bx, clamp).map_err(|e| e.to_string())?;
            for s in &simplices {
                let y = pl_eval_in(&mut o, s, &x, &bx, clamp).map_err(|e| e.to_string())?;
                ensure!(y == reference, "face mismatch at {x:?} in {s:?}");
            }
        }
        faces += simplices.len();
    }
    Ok(format!(
        "{steps} recursion steps over {} instances all halve ({recursing} instances recurse); PL = f on [4]^2 for {pl_funcs} functions; 1000 boundary points agree across {faces} simplices",
        instances.len() + extra.len() + sampled
    ))
}

// 6. Supermodular layer.

fn diagonal(x: &[i64]) -> GridPoint {
    GridPoint::new([x, x].concat())
}

fn beta_bar_monotone(g: &SupermodularGame) -> Result<(), String> {
    for kind in [BestResponseKind::Sup, BestResponseKind::Inf] {
        let mut o = beta_bar_oracle(g, kind);
        let bx = full(&o);
        let v = check_monotone_exhaustive(&mut o, &bx).map_err(|e| e.to_string())?;
        ensure!(v.is_none(), "beta-bar {kind:?} not monotone: {v:?}");
    }
    Ok(())
}

fn supermodular_layer() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut diamonds = Vec::new();
    for players in 2..=4usize {
        for _ in 0..40 {
            let alpha: Vec<Q> = (0..players).map(|_| qi(rng.gen_range(1..=3))).collect();
            let costs: Vec<Vec<Q>> = (0..players).map(|_| (0..3).map(|_| qi(rng.gen_range(-4..=12))).collect()).collect();
            diamonds.push(diamond_search(&alpha, &costs).map_err(|e| e.to_string())?);
        }
    }
    diamonds.par_iter().try_for_each(|g| {
        ensure!(g.profile_box().num_points() <= 81, "diamond game too large");
        beta_bar_monotone(g)
    })?;

    let mut catalogs = 0;
    for side in [2i64, 3] {
        let fs: Vec<TableFn> = exhaustive_monotone_catalog(&GridShape::uniform(2, side).unwrap()).collect();
        fs.par_iter().try_for_each(|f| -> Result<(), String> {
            let g = game_from_monotone(f);
            let expected: Vec<GridPoint> = fix_set(f)?.all_fixed_points.iter().map(|p| diagonal(p)).collect();
            let got = pure_equilibria(&g);
            ensure!(got == expected, "equilibria {got:?} != diagonal fixed points {expected:?}");
            beta_bar_monotone(&g)
        })?;
        catalogs += fs.len();
    }

    let mut worst = 0.0f64;
    for k in 4u32..=12 {
        let n = 1i64 << k;
        for i in 0..6 {
            let f = random_monotone_table(&GridShape::uniform(1, n).unwrap(), &mut rng_for(601, (k as usize) * 8 + i));
            let g = game_from_monotone(&f);
            let eq = solve_equilibrium(&g, BestResponseKind::Sup, true).map_err(|e| e.to_string())?;
            ensure!(eq.oracle_calls <= k as u64 + 2, "N={n}: {} calls > {}", eq.oracle_calls, k + 2);
            ensure!(g.is_equilibrium(&eq.profile), "N={n}: {} is not an equilibrium", eq.profile);
            let x = GridPoint::new(vec![eq.profile[0]]);
            ensure!(f.get(&x) == &x, "N={n}: equilibrium does not project to a fixed point");
            worst = worst.max(eq.oracle_calls as f64 / (k + 2) as f64);
        }
    }
    Ok(format!(
        "beta-bar monotone on {} diamond games and {catalogs} reduction games; bijection exact on the [2]^2 and [3]^2 catalogs; shortcut worst {:.0}% of log N + 2 up to N=2^12",
        diamonds.len(),
        worst * 100.0
    ))
}

// 7. Stochastic layer.

fn sup_dist(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or_else(Q::zero)
}

fn random_values<R: Rng>(g: &SsgInstance, rng: &mut R) -> Vec<Q> {
    g.vertices
        .iter()
        .map(|v| match v.kind {
            VertexKind::ZeroSink => Q::zero(),
            VertexKind::OneSink => Q::one(),
            _ => q(rng.gen_range(0..=256), 256),
        })
        .collect()
}

fn stochastic_layer() -> Check {
    let mut catalog = ssg_catalog();
    catalog.push((
        "self-loop".into(),
        SsgInstance::new(vec![SsgInstance::player(VertexKind::Max, &[0, 1]), SsgInstance::sink(VertexKind::ZeroSink)], 0)
            .unwrap(),
    ));
    catalog.par_iter().try_for_each(|(name, g)| -> Result<(), String> {
        let exact = ssg_brute_force(g).map_err(|e| e.to_string())?;
        let plan = PrecisionPlan::for_ssg(g, &SsgPlanOptions::default()).map_err(|e| e.to_string())?;
        let sol = ssg_solve_tarski(g, &plan).map_err(|e| e.to_string())?;
        ensure!(sol.rounded == exact, "{name}: rounded {:?} != exact {exact:?}", sol.rounded);
        if name == "self-loop" {
            ensure!(exact[0].is_zero() && sol.rounded[0].is_zero(), "self-loop value is not 0");
        }
        Ok(())
    })?;

    let eps = q(1, 1_000_000);
    let closed = [(qi(1), q(1, 2)), (qi(-3), q(3, 4)), (q(5, 2), q(1, 10)), (qi(0), q(1, 3)), (q(7, 3), q(9, 10))];
    for (a, stay) in &closed {
        let g = ShapleyInstance::single(a.clone(), stay.clone()).map_err(|e| e.to_string())?;
        let exact = a / (Q::one() - stay);
        for route in [ShapleyRoute::ContractionIteration, ShapleyRoute::TarskiGrid] {
            let s = shapley_solve(&g, &eps, route).map_err(|e| e.to_string())?;
            ensure!((&s.values[0] - &exact).abs() < eps, "{route:?}: {} vs a/q = {exact}", s.values[0]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let shapleys: Vec<ShapleyInstance> = (0..5).map(|_| random_shapley(3, 2, &mut rng)).collect();
    shapleys.par_iter().try_for_each(|g| -> Result<(), String> {
        let reference = shapley_solve(g, &q(1, 1_000_000_000_000), ShapleyRoute::ContractionIteration)
            .map_err(|e| e.to_string())?;
        for route in [ShapleyRoute::ContractionIteration, ShapleyRoute::TarskiGrid] {
            let s = shapley_solve(g, &eps, route).map_err(|e| e.to_string())?;
            ensure!(sup_dist(&s.values, &reference.values) < eps, "{route:?} is not within eps of the reference");
        }
        Ok(())
    })?;

    let ssgs: Vec<SsgInstance> = (0..20).map(|i| random_ssg(1 + i % 4, &mut rng)).collect();
    let mut pairs = 0;
    for (i, g) in ssgs.iter().enumerate() {
        let beta = q(1, rng.gen_range(2..=64));
        let mut r = rng_for(701, i);
        for _ in 0..1000 {
            let (x, y) = (random_values(g, &mut r), random_values(g, &mut r));
            let fx = ssg_discounted_map(g, &beta, &x).map_err(|e| e.to_string())?;
            let fy = ssg_discounted_map(g, &beta, &y).map_err(|e| e.to_string())?;
            ensure!(sup_dist(&fx, &fy) <= (Q::one() - &beta) * sup_dist(&x, &y), "SSG {i}: not a (1-beta) contraction");
            pairs += 1;
        }
    }
    for (i, g) in shapleys.iter().enumerate() {
        let qh = g.halting_probability();
        let bound = g.reward_bound() / &qh;
        let mut r = rng_for(702, i);
        for _ in 0..1000 {
            let mut point = || -> Vec<Q> { (0..3).map(|_| &bound * q(r.gen_range(-64..=64), 64)).collect() };
            let (x, y) = (point(), point());
            let fx = shapley_value_map(g, &x).map_err(|e| e.to_string())?;
            let fy = shapley_value_map(g, &y).map_err(|e| e.to_string())?;
            ensure!(sup_dist(&fx, &fy) <= (Q::one() - &qh) * sup_dist(&x, &y), "Shapley {i}: not a (1-q) contraction");
            pairs += 1;
        }
    }
    Ok(format!(
        "{} SSGs rounded exactly (self-loop value 0); Shapley within 1e-6 on {} closed forms and {} 3-state references; {pairs} contraction pairs exact",
        catalog.len(),
        closed.len(),
        shapleys.len()
    ))
}

// 8. SAT reduction.

fn all_clauses(n: u32) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    for code in 1..3u32.pow(n) {
        let mut c = Vec::new();
        let mut rest = code;
        for v in 1..=n as i32 {
            match rest % 3 {
                1 => c.push(v),
                2 => c.push(-v),
                _ => {}
            }
            rest /= 3;
        }
        out.push(c);
    }
    out
}

fn satisfiable_by_enumeration(n: u32, clauses: &[Vec<i32>]) -> bool {
    (0..1u64 << n).any(|a| clauses.iter().all(|c| c.iter().any(|&l| ((a >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0))))
}

fn check_sat(n: u32, clauses: Vec<Vec<i32>>) -> Result<bool, String> {
    let sat = satisfiable_by_enumeration(n, &clauses);
    let cnf = CnfFormula::new(n, clauses).map_err(|e| e.to_string())?;
    let f = sat_lfp_instance(&cnf).map_err(|e| e.to_string())?;
    let top = f.top();
    let mut o = Oracle::new(f);
    let bx = full(&o);
    let lfp = brute_force_fix(&mut o, &bx).map_err(|e| e.to_string())?.lfp[0];
    ensure!((lfp < top) == sat, "{cnf:?}: lfp {lfp}, top {top}, satisfiable {sat}");
    Ok(sat)
}

fn sat_reduction() -> Check {
    let mut formulas: Vec<(u32, Vec<Vec<i32>>)> = Vec::new();
    for n in 1..=3u32 {
        let clauses = all_clauses(n);
        formulas.push((n, Vec::new()));
        for a in 0..clauses.len() {
            formulas.push((n, vec![clauses[a].clone()]));
            for b in a + 1..clauses.len() {
                formulas.push((n, vec![clauses[a].clone(), clauses[b].clone()]));
            }
        }
    }
    let full_width: Vec<Vec<i32>> = all_clauses(3).into_iter().filter(|c| c.len() == 3).collect();
    for mask in 0u32..256 {
        formulas.push((3, (0..8).filter(|i| mask >> i & 1 == 1).map(|i| full_width[i].clone()).collect()));
    }
    let pool = all_clauses(3);
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    for _ in 0..3000 {
        let m = rng.gen_range(3..=10);
        formulas.push((3, (0..m).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect()));
    }
    let sat = formulas
        .par_iter()
        .map(|(n, c)| check_sat(*n, c.clone()).map(usize::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(format!(
        "{} CNFs on <= 3 variables ({sat} satisfiable): every formula with <= 2 clauses, all 256 Boolean functions on 3 variables, 3000 random",
        formulas.len()
    ))
}

fn run(id: usize, name: &str, check: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let secs = start.elapsed().as_secs_f64();
    match &result {
        Ok(detail) => println!("criterion {id} {name}: PASS ({detail}) [{secs:.1}s]"),
        Err(why) => println!("criterion {id} {name}: FAIL ({why}) [{secs:.1}s]"),
    }
    result.is_ok()
}

fn main() -> ExitCode {
    let instances = criterion_one_instances(10_000);
    let mut duels = None;
    let mut get_duels = || -> Result<Vec<DuelReport>, String> {
        if duels.is_none() {
            duels = Some(run_duels()?);
        }
        Ok(duels.clone().unwrap())
    };
    let results = [
        run(1, "solver agreement", || solver_agreement(&instances)),
        run(2, "step and query bounds", || bounds(&instances)),
        run(3, "lower-bound evidence", || lower_bound_evidence(&get_duels()?)),
        run(4, "adversary soundness", || adversary_soundness(&get_duels()?)),
        run(5, "ppad route structure", || ppad_structure(&instances)),
        run(6, "supermodular layer", supermodular_layer),
        run(7, "stochastic layer", stochastic_layer),
        run(8, "sat reduction", sat_reduction),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
