//! Fixed-point algorithms for monotone grid functions.
//!
//! All solvers share the same contract: they either return a fixed point of
//! `f` inside the requested box, or a pair `x <= y` with `f(x) !<= f(y)`.
//! Queries are counted by the [`Oracle`] they are given.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GridBox, GridPoint};
use crate::oracle::{GridFn, MonotonicityWitness, Oracle, Query};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    FixedPoint(GridPoint),
    Witness(MonotonicityWitness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub outcome: Outcome,
    /// Queries spent by this solve (not the oracle's lifetime total).
    pub queries: u64,
}

impl SolveOutcome {
    pub fn fixed_point(&self) -> Option<&GridPoint> {
        match &self.outcome {
            Outcome::FixedPoint(p) => Some(p),
            Outcome::Witness(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&MonotonicityWitness> {
        match &self.outcome {
            Outcome::Witness(w) => Some(w),
            Outcome::FixedPoint(_) => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.outcome {
            Outcome::FixedPoint(_) => "fixed_point",
            Outcome::Witness(_) => "witness",
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
enum OutcomeRepr {
    FixedPoint { point: GridPoint, queries: u64 },
    Witness { pair: MonotonicityWitness, queries: u64 },
}

impl Serialize for SolveOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match &self.outcome {
            Outcome::FixedPoint(p) => OutcomeRepr::FixedPoint { point: p.clone(), queries: self.queries },
            Outcome::Witness(w) => OutcomeRepr::Witness { pair: w.clone(), queries: self.queries },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SolveOutcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match OutcomeRepr::deserialize(d)? {
            OutcomeRepr::FixedPoint { point, queries } => SolveOutcome { outcome: Outcome::FixedPoint(point), queries },
            OutcomeRepr::Witness { pair, queries } => SolveOutcome { outcome: Outcome::Witness(pair), queries },
        })
    }
}

/// The complete fixed-point set of `f` on a box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixSet {
    pub all_fixed_points: BTreeSet<Vec<i64>>,
    /// Componentwise meet of all fixed points; the LFP when `f` is monotone.
    pub lfp: GridPoint,
    /// Componentwise join of all fixed points; the GFP when `f` is monotone.
    pub gfp: GridPoint,
}

impl FixSet {
    pub fn contains(&self, p: &GridPoint) -> bool {
        self.all_fixed_points.contains(p.coords())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterationDirection {
    FromBottom,
    FromTop,
}

fn finish<F: GridFn>(oracle: &Oracle<F>, start: u64, outcome: Outcome) -> SolveOutcome {
    SolveOutcome { outcome, queries: oracle.queries() - start }
}

/// Kleene iteration from the bottom (or top) of `bx`.
///
/// On a monotone `f` mapping `bx` into itself this reaches the least (greatest)
/// fixed point in at most `sum_i (side_i - 1) + 1` evaluations. If the iterates
/// stop ascending (descending), the last two iterates form a witness.
pub fn value_iteration<F: GridFn>(
    oracle: &mut Oracle<F>,
    bx: &GridBox,
    dir: IterationDirection,
) -> Result<SolveOutcome> {
    let start = oracle.queries();
    let ascending = dir == IterationDirection::FromBottom;
    let origin = if ascending { bx.low.clone() } else { bx.high.clone() };
    let f_origin = oracle.query(&origin)?;
    let mut prev: Option<GridPoint> = None;
    let mut x = origin.clone();
    let mut fx = f_origin.clone();
    loop {
        if !bx.contains(&fx) {
            return escape(oracle, bx, start, &origin, &f_origin, &x, &fx, ascending);
        }
        if fx == x {
            return Ok(finish(oracle, start, Outcome::FixedPoint(x)));
        }
        let in_order = if ascending { x <= fx } else { fx <= x };
        if !in_order {
            let Some(p) = prev else {
                return Err(Error::MalformedInput(format!(
                    "f({x}) = {fx} points out of the box corner; iteration cannot start"
                )));
            };
            // f(p) = x, and x fails to move in the same direction as p did.
            let w = if ascending {
                MonotonicityWitness { x: p, y: x.clone(), fx: x, fy: fx }
            } else {
                MonotonicityWitness { x: x.clone(), y: p, fx, fy: x }
            };
            return Ok(finish(oracle, start, Outcome::Witness(w)));
        }
        prev = Some(x);
        x = fx;
        fx = oracle.query(&x)?;
    }
}

/// Handles an iterate whose image leaves the box: compare against the two
/// corners of the box, which is the only information available.
#[allow(clippy::too_many_arguments)]
fn escape<F: GridFn>(
    oracle: &mut Oracle<F>,
    bx: &GridBox,
    start: u64,
    origin: &GridPoint,
    f_origin: &GridPoint,
    x: &GridPoint,
    fx: &GridPoint,
    ascending: bool,
) -> Result<SolveOutcome> {
    let (far, near_is_low) = if ascending { (bx.high.clone(), true) } else { (bx.low.clone(), false) };
    let f_far = oracle.query(&far)?;
    let candidates = [(origin, f_origin), (&far, &f_far)];
    for (c, fc) in candidates {
        if let Some(w) = MonotonicityWitness::check(x, fx, c, fc) {
            return Ok(finish(oracle, start, Outcome::Witness(w)));
        }
    }
    let _ = near_is_low;
    Err(Error::MalformedInput(format!("f({x}) = {fx} escapes the box {bx} and no violated pair is in hand")))
}

/// Binary search for a fixed point of a monotone function on an interval.
pub fn binary_search_1d<F: GridFn>(oracle: &mut Oracle<F>, interval: &GridBox) -> Result<SolveOutcome> {
    if interval.dims() != 1 {
        return Err(Error::ShapeMismatch { expected: 1, got: interval.dims() });
    }
    dqy_solve(oracle, interval, false)
}

/// Divide-and-conquer solver using `O(prod_i log side_i)` queries.
///
/// Fixes the last coordinate to the midpoint `m`, recursively solves the
/// induced function on the remaining coordinates to get `x*`, then shrinks
/// the box to `L(f(x*,m), high)` or `L(low, f(x*,m))` depending on which
/// side of `m` the last component of `f(x*,m)` falls.
///
/// With `paranoid` set, every new query is cross-checked against all
/// earlier ones and the first violated comparable pair is returned.
pub fn dqy_solve<F: GridFn>(oracle: &mut Oracle<F>, bx: &GridBox, paranoid: bool) -> Result<SolveOutcome> {
    if bx.dims() != oracle.dims() {
        return Err(Error::ShapeMismatch { expected: oracle.dims(), got: bx.dims() });
    }
    if !oracle.full_box().contains(&bx.low) || !oracle.full_box().contains(&bx.high) {
        return Err(Error::OutOfBox { point: bx.high.clone() });
    }
    let start = oracle.queries();
    let mut run = Dqy { oracle, paranoid, seen: Vec::new() };
    let step = run.solve(bx.low.clone(), bx.high.clone(), bx.dims())?;
    let outcome = match step {
        Step::Found { x, .. } => Outcome::FixedPoint(x),
        Step::Witness(w) => Outcome::Witness(w),
    };
    Ok(finish(run.oracle, start, outcome))
}

enum Step {
    Found { x: GridPoint, fx: GridPoint },
    Witness(MonotonicityWitness),
}

struct Dqy<'o, F> {
    oracle: &'o mut Oracle<F>,
    paranoid: bool,
    seen: Vec<Query>,
}

impl<F: GridFn> Dqy<'_, F> {
    fn query(&mut self, x: &GridPoint) -> Result<std::result::Result<GridPoint, MonotonicityWitness>> {
        let fx = self.oracle.query(x)?;
        if self.paranoid {
            if let Some(w) = self.violation_with(x, &fx) {
                return Ok(Err(w));
            }
        }
        self.seen.push(Query { x: x.clone(), fx: fx.clone() });
        Ok(Ok(fx))
    }

    fn violation_with(&self, x: &GridPoint, fx: &GridPoint) -> Option<MonotonicityWitness> {
        self.seen.iter().find_map(|q| MonotonicityWitness::check(&q.x, &q.fx, x, fx))
    }

    fn any_violation(&self) -> Option<MonotonicityWitness> {
        self.seen
            .iter()
            .enumerate()
            .find_map(|(i, a)| self.seen[i + 1..].iter().find_map(|b| MonotonicityWitness::check(&a.x, &a.fx, &b.x, &b.fx)))
    }

    /// Coordinates `free..` of `low` and `high` coincide; coordinates
    /// `..free` span the box the induced function lives on.
    fn solve(&mut self, mut low: GridPoint, mut high: GridPoint, free: usize) -> Result<Step> {
        if free == 0 {
            return Ok(match self.query(&low)? {
                Ok(fx) => Step::Found { x: low, fx },
                Err(w) => Step::Witness(w),
            });
        }
        let c = free - 1;
        loop {
            let m = (low[c] + high[c]).div_euclid(2);
            let mut sub_low = low.clone();
            let mut sub_high = high.clone();
            sub_low[c] = m;
            sub_high[c] = m;
            let (x, fx) = match self.solve(sub_low, sub_high, c)? {
                Step::Found { x, fx } => (x, fx),
                w @ Step::Witness(_) => return Ok(w),
            };
            let inside = (0..free).all(|i| low[i] <= fx[i] && fx[i] <= high[i]);
            if !inside {
                if let Some(w) = self.any_violation() {
                    return Ok(Step::Witness(w));
                }
                return Err(Error::MalformedInput(format!(
                    "f({x}) = {fx} leaves the current box [{low}, {high}] with no violated pair in hand"
                )));
            }
            if fx[c] == m {
                return Ok(Step::Found { x, fx });
            }
            if fx[c] > m {
                low.coords_mut()[..free].copy_from_slice(&fx.coords()[..free]);
            } else {
                high.coords_mut()[..free].copy_from_slice(&fx.coords()[..free]);
            }
        }
    }
}

/// The ascending walk that realizes the local-search view of the problem:
/// from `x <= f(x)`, step to `f(x)` whenever `f(x) <= f(f(x))`, and otherwise
/// report `(x, f(x))` as a violated pair. The payoff `sum_i x_i` strictly
/// increases along the walk.
pub fn local_search_pls<F: GridFn>(oracle: &mut Oracle<F>, bx: &GridBox) -> Result<SolveOutcome> {
    let start = oracle.queries();
    let mut x = bx.low.clone();
    let mut fx = oracle.query(&x)?;
    if !(x <= fx) || !bx.contains(&fx) {
        return Err(Error::MalformedInput(format!("walk cannot start: f({x}) = {fx} is not above the box bottom")));
    }
    loop {
        if fx == x {
            return Ok(finish(oracle, start, Outcome::FixedPoint(x)));
        }
        let ffx = oracle.query(&fx)?;
        if fx <= ffx {
            if !bx.contains(&ffx) {
                return Err(Error::MalformedInput(format!("f({fx}) = {ffx} escapes the box {bx}")));
            }
            x = fx;
            fx = ffx;
        } else {
            let w = MonotonicityWitness { x, y: fx.clone(), fx, fy: ffx };
            return Ok(finish(oracle, start, Outcome::Witness(w)));
        }
    }
}

/// Ground truth by exhaustive evaluation.
pub fn brute_force_fix<F: GridFn>(oracle: &mut Oracle<F>, bx: &GridBox) -> Result<FixSet> {
    let mut fixed = BTreeSet::new();
    let mut values = Vec::new();
    for x in bx.points() {
        let fx = oracle.query(&x)?;
        if fx == x {
            fixed.insert(x.coords().to_vec());
        }
        values.push((x, fx));
    }
    if fixed.is_empty() {
        let monotone = values
            .iter()
            .all(|(x, fx)| values.iter().all(|(y, fy)| !(x <= y) || fx <= fy));
        return Err(if monotone {
            Error::Internal(format!("monotone function without a fixed point on {bx}"))
        } else {
            Error::MalformedInput(format!("no fixed point on {bx}; the function is not monotone"))
        });
    }
    let mut it = fixed.iter().map(|v| GridPoint::new(v.clone()));
    let first = it.next().expect("non-empty");
    let (lfp, gfp) = it.fold((first.clone(), first), |(lo, hi), p| (lo.meet(&p), hi.join(&p)));
    Ok(FixSet { all_fixed_points: fixed, lfp, gfp })
}

/// Solver identifiers shared by the CLI, benchmarks and duels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Dqy,
    /// Value iteration from the bottom.
    Vi,
    /// Value iteration from the top.
    ViTop,
    Pls,
    /// Binary search; on more than one dimension this is the nested binary
    /// search of [`dqy_solve`].
    Binsearch,
    Ppad,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] =
        [SolverKind::Dqy, SolverKind::Vi, SolverKind::ViTop, SolverKind::Pls, SolverKind::Binsearch, SolverKind::Ppad];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Dqy => "dqy",
            SolverKind::Vi => "vi",
            SolverKind::ViTop => "vi_top",
            SolverKind::Pls => "pls",
            SolverKind::Binsearch => "binsearch",
            SolverKind::Ppad => "ppad",
        }
    }

    pub fn run<F: GridFn>(self, oracle: &mut Oracle<F>, bx: &GridBox, paranoid: bool) -> Result<SolveOutcome> {
        match self {
            SolverKind::Dqy => dqy_solve(oracle, bx, paranoid),
            SolverKind::Vi => value_iteration(oracle, bx, IterationDirection::FromBottom),
            SolverKind::ViTop => value_iteration(oracle, bx, IterationDirection::FromTop),
            SolverKind::Pls => local_search_pls(oracle, bx),
            SolverKind::Binsearch if bx.dims() == 1 => binary_search_1d(oracle, bx),
            SolverKind::Binsearch => dqy_solve(oracle, bx, paranoid),
            SolverKind::Ppad => crate::simplicial::ppad_route_solve(oracle, bx),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dqy" => SolverKind::Dqy,
            "vi" | "value_iteration" => SolverKind::Vi,
            "vi_top" | "vi-top" => SolverKind::ViTop,
            "pls" => SolverKind::Pls,
            "binsearch" => SolverKind::Binsearch,
            "ppad" => SolverKind::Ppad,
            other => return Err(Error::MalformedInput(format!("unknown solver {other:?}"))),
        })
    }
}
