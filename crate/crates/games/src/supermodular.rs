//! Supermodular games on grid strategy spaces and their best-response maps.
//!
//! A profile is one [`GridPoint`] holding every player's coordinates in
//! player order. Strategy boxes may start anywhere (e.g. efforts `0..=m`);
//! the best-response oracles translate to the 1-based grids the solvers use.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use tarski_core::{dqy_solve, GridBox, GridFn, GridPoint, GridShape, Oracle, Outcome, TableFn};

use crate::error::{Error, Result};
use crate::rational::{qi, serde_q, Q};

pub type UtilityFn = dyn Fn(usize, &GridPoint) -> Q + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BestResponseKind {
    Sup,
    Inf,
}

/// A counterexample to one of the lattice conditions on utilities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum PropertyViolation {
    /// `u(x) + u(y) > u(x v y) + u(x ^ y)` for profiles `x`, `y` that
    /// differ only in `player`'s block.
    Supermodularity { player: usize, x: GridPoint, y: GridPoint },
    /// `u(x', y') - u(x, y') < u(x', y) - u(x, y)` with own strategies
    /// `x <= x'` and profiles `y <= y'` (whose own block is ignored).
    IncreasingDifferences { player: usize, x: GridPoint, x_prime: GridPoint, y: GridPoint, y_prime: GridPoint },
    /// The join (or meet) `candidate` of the argmax set against `profile`
    /// is not itself a best response.
    SupNotInArgmax { player: usize, profile: GridPoint, candidate: GridPoint },
}

impl fmt::Display for PropertyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Supermodularity { player, x, y } => {
                write!(f, "utility of player {player} is not supermodular at {x} and {y}")
            }
            Self::IncreasingDifferences { player, x, x_prime, y, y_prime } => write!(
                f,
                "utility of player {player} lacks increasing differences at own {x} <= {x_prime}, others {y} <= {y_prime}"
            ),
            Self::SupNotInArgmax { player, profile, candidate } => {
                write!(f, "player {player}: extremal argmax {candidate} against {profile} is not a best response")
            }
        }
    }
}

impl std::error::Error for PropertyViolation {}

impl PropertyViolation {
    /// Re-evaluates the stored points and reports whether the violated
    /// inequality still fails.
    pub fn reproduces(&self, game: &SupermodularGame) -> Result<bool> {
        match self {
            Self::Supermodularity { player, x, y } => {
                let (j, m) = (x.join(y), x.meet(y));
                let u = |p: &GridPoint| game.utility(*player, p);
                Ok(u(x) + u(y) > u(&j) + u(&m))
            }
            Self::IncreasingDifferences { player, x, x_prime, y, y_prime } => {
                let i = *player;
                let u = |own: &GridPoint, rest: &GridPoint| game.utility(i, &game.with_block(rest, i, own));
                Ok(u(x_prime, y_prime) - u(x, y_prime) < u(x_prime, y) - u(x, y))
            }
            Self::SupNotInArgmax { player, profile, candidate } => {
                let best = game.best_value(*player, profile);
                Ok(game.utility(*player, &game.with_block(profile, *player, candidate)) != best)
            }
        }
    }
}

/// Serializable description of a game: strategy boxes plus a payoff family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub strategy_boxes: Vec<GridBox>,
    #[serde(flatten)]
    pub payoff: Payoff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Payoff {
    /// `table[i]` lists player `i`'s utility for every profile in row-major
    /// order of the product box.
    Table {
        #[serde(with = "serde_q::matrix")]
        table: Vec<Vec<Q>>,
    },
    /// `u_i(s) = alpha_i * s_i * sum_{j != i} s_j - costs[i][s_i - low_i]`
    /// on one-dimensional effort boxes.
    DiamondSearch {
        #[serde(with = "serde_q::vec")]
        alpha: Vec<Q>,
        #[serde(with = "serde_q::matrix")]
        costs: Vec<Vec<Q>>,
    },
}

#[derive(Clone)]
pub struct SupermodularGame {
    boxes: Vec<GridBox>,
    starts: Vec<usize>,
    profile_box: GridBox,
    utility: Arc<UtilityFn>,
    spec: Option<GameSpec>,
}

impl fmt::Debug for SupermodularGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SupermodularGame").field("boxes", &self.boxes).finish_non_exhaustive()
    }
}

impl SupermodularGame {
    /// `utility(i, profile)` is player `i`'s payoff at a full profile.
    pub fn new<U>(boxes: Vec<GridBox>, utility: U) -> Result<Self>
    where
        U: Fn(usize, &GridPoint) -> Q + Send + Sync + 'static,
    {
        if boxes.is_empty() {
            return Err(Error::MalformedInstance("a game needs at least one player".into()));
        }
        let mut starts = Vec::with_capacity(boxes.len());
        let (mut low, mut high) = (Vec::new(), Vec::new());
        for b in &boxes {
            starts.push(low.len());
            low.extend_from_slice(b.low.coords());
            high.extend_from_slice(b.high.coords());
        }
        let profile_box = GridBox::new(GridPoint::new(low), GridPoint::new(high))?;
        Ok(Self { boxes, starts, profile_box, utility: Arc::new(utility), spec: None })
    }

    pub fn from_spec(spec: GameSpec) -> Result<Self> {
        let mut game = match &spec.payoff {
            Payoff::Table { table } => table_game(spec.strategy_boxes.clone(), table.clone())?,
            Payoff::DiamondSearch { alpha, costs } => {
                let g = diamond_search(alpha, costs)?;
                if g.boxes != spec.strategy_boxes {
                    return Err(Error::MalformedInstance(
                        "diamond_search strategy boxes must be 0..=len(costs_i)-1".into(),
                    ));
                }
                g
            }
        };
        game.spec = Some(spec);
        Ok(game)
    }

    pub fn spec(&self) -> Option<&GameSpec> {
        self.spec.as_ref()
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        Self::from_spec(serde_json::from_value(value)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(serde_json::from_str(&text)?)
    }

    pub fn players(&self) -> usize {
        self.boxes.len()
    }

    pub fn strategy_box(&self, i: usize) -> &GridBox {
        &self.boxes[i]
    }

    pub fn player_dims(&self, i: usize) -> usize {
        self.boxes[i].dims()
    }

    pub fn dims(&self) -> usize {
        self.profile_box.dims()
    }

    pub fn profile_box(&self) -> &GridBox {
        &self.profile_box
    }

    pub fn utility(&self, i: usize, profile: &GridPoint) -> Q {
        (self.utility)(i, profile)
    }

    fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.starts[i]..self.starts[i] + self.boxes[i].dims()
    }

    /// Player `i`'s block of a profile.
    pub fn block(&self, profile: &GridPoint, i: usize) -> GridPoint {
        GridPoint::new(profile.coords()[self.range(i)].to_vec())
    }

    pub fn with_block(&self, profile: &GridPoint, i: usize, s: &GridPoint) -> GridPoint {
        let mut p = profile.clone();
        p.coords_mut()[self.range(i)].copy_from_slice(s.coords());
        p
    }

    /// The 1-based grid the best-response oracles live on.
    pub fn grid_shape(&self) -> GridShape {
        GridShape::new((0..self.dims()).map(|c| self.profile_box.side(c)).collect()).expect("ordered box")
    }

    pub fn to_grid(&self, profile: &GridPoint) -> GridPoint {
        GridPoint::new(profile.coords().iter().zip(self.profile_box.low.coords()).map(|(p, l)| p - l + 1).collect())
    }

    pub fn from_grid(&self, x: &GridPoint) -> GridPoint {
        GridPoint::new(x.coords().iter().zip(self.profile_box.low.coords()).map(|(p, l)| p + l - 1).collect())
    }

    fn best_value(&self, i: usize, profile: &GridPoint) -> Q {
        self.boxes[i]
            .points()
            .map(|s| self.utility(i, &self.with_block(profile, i, &s)))
            .max()
            .expect("non-empty box")
    }

    pub fn is_equilibrium(&self, profile: &GridPoint) -> bool {
        (0..self.players()).all(|i| self.utility(i, profile) == self.best_value(i, profile))
    }
}

/// Player `i`'s extremal best response to the other blocks of `profile`
/// (its own block is ignored).
pub fn best_response(
    game: &SupermodularGame,
    i: usize,
    profile: &GridPoint,
    kind: BestResponseKind,
) -> std::result::Result<GridPoint, PropertyViolation> {
    let mut best: Option<Q> = None;
    let mut argmax: Vec<GridPoint> = Vec::new();
    for s in game.boxes[i].points() {
        let u = game.utility(i, &game.with_block(profile, i, &s));
        match best.as_ref().map(|b| u.cmp(b)) {
            None | Some(std::cmp::Ordering::Greater) => {
                best = Some(u);
                argmax.clear();
                argmax.push(s);
            }
            Some(std::cmp::Ordering::Equal) => argmax.push(s),
            Some(std::cmp::Ordering::Less) => {}
        }
    }
    let first = argmax[0].clone();
    let candidate = argmax[1..].iter().fold(first, |acc, s| match kind {
        BestResponseKind::Sup => acc.join(s),
        BestResponseKind::Inf => acc.meet(s),
    });
    if argmax.contains(&candidate) {
        Ok(candidate)
    } else {
        Err(PropertyViolation::SupNotInArgmax { player: i, profile: profile.clone(), candidate })
    }
}

/// The profile map `s -> (BR_1(s_-1), ..., BR_k(s_-k))` on the 1-based grid
/// of [`SupermodularGame::grid_shape`].
pub struct BetaFn<'g> {
    game: &'g SupermodularGame,
    kind: BestResponseKind,
    shape: GridShape,
}

impl<'g> BetaFn<'g> {
    pub fn new(game: &'g SupermodularGame, kind: BestResponseKind) -> Self {
        Self { game, kind, shape: game.grid_shape() }
    }
}

impl GridFn for BetaFn<'_> {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> tarski_core::Result<GridPoint> {
        let profile = self.game.from_grid(x);
        let mut out = profile.clone();
        for i in 0..self.game.players() {
            let br = best_response(self.game, i, &profile, self.kind)
                .map_err(|v| tarski_core::Error::Evaluation(Box::new(v)))?;
            out = self.game.with_block(&out, i, &br);
        }
        Ok(self.game.to_grid(&out))
    }
}

pub fn beta_bar_oracle(game: &SupermodularGame, kind: BestResponseKind) -> Oracle<BetaFn<'_>> {
    Oracle::new(BetaFn::new(game, kind))
}

/// The shortcut map on everyone but player `skip`: the skipped player
/// best-responds first, then all others respond to the completed profile.
struct ReducedFn<'g> {
    game: &'g SupermodularGame,
    kind: BestResponseKind,
    skip: usize,
    coords: Vec<usize>,
    shape: GridShape,
}

impl ReducedFn<'_> {
    fn complete(&self, y: &GridPoint) -> std::result::Result<GridPoint, PropertyViolation> {
        let mut profile = self.game.profile_box.low.clone();
        for (k, &c) in self.coords.iter().enumerate() {
            profile[c] = y[k] + self.game.profile_box.low[c] - 1;
        }
        let br = best_response(self.game, self.skip, &profile, self.kind)?;
        Ok(self.game.with_block(&profile, self.skip, &br))
    }
}

impl GridFn for ReducedFn<'_> {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, y: &GridPoint) -> tarski_core::Result<GridPoint> {
        let lift = |v: PropertyViolation| tarski_core::Error::Evaluation(Box::new(v));
        let profile = self.complete(y).map_err(lift)?;
        let mut out = profile.clone();
        for i in (0..self.game.players()).filter(|&i| i != self.skip) {
            let br = best_response(self.game, i, &profile, self.kind).map_err(lift)?;
            out = self.game.with_block(&out, i, &br);
        }
        Ok(GridPoint::new(self.coords.iter().map(|&c| out[c] - self.game.profile_box.low[c] + 1).collect()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Equilibrium {
    pub profile: GridPoint,
    /// Evaluations of the best-response oracle handed to the solver.
    pub oracle_calls: u64,
}

/// A pure Nash equilibrium as a fixed point of the extremal best-response
/// map. With `shortcut`, the block of the largest player (lowest index on
/// ties) is substituted by its best response inside each oracle call, so the
/// solver only recurses over the remaining `d - max_i d_i` coordinates.
pub fn solve_equilibrium(game: &SupermodularGame, kind: BestResponseKind, shortcut: bool) -> Result<Equilibrium> {
    let (profile, oracle_calls) = if !shortcut {
        let mut oracle = beta_bar_oracle(game, kind);
        let bx = oracle.full_box().clone();
        let out = dqy_solve(&mut oracle, &bx, false)?;
        (game.from_grid(&fixed_or_witness(out.outcome)?), out.queries)
    } else {
        let skip = (0..game.players()).rev().max_by_key(|&i| game.player_dims(i)).expect("non-empty");
        if game.players() == 1 {
            let br = best_response(game, 0, &game.profile_box.low, kind)?;
            (br, 1)
        } else {
            let coords: Vec<usize> = (0..game.players()).filter(|&i| i != skip).flat_map(|i| game.range(i)).collect();
            let shape = GridShape::new(coords.iter().map(|&c| game.profile_box.side(c)).collect())?;
            let reduced = ReducedFn { game, kind, skip, coords, shape };
            let mut oracle = Oracle::new(reduced);
            let bx = oracle.full_box().clone();
            let out = dqy_solve(&mut oracle, &bx, false)?;
            let y = fixed_or_witness(out.outcome)?;
            (oracle.inner().complete(&y)?, out.queries)
        }
    };
    if !game.is_equilibrium(&profile) {
        return Err(Error::Core(tarski_core::Error::Internal(format!(
            "fixed point {profile} of the best-response map is not an equilibrium"
        ))));
    }
    Ok(Equilibrium { profile, oracle_calls })
}

fn fixed_or_witness(outcome: Outcome) -> Result<GridPoint> {
    match outcome {
        Outcome::FixedPoint(p) => Ok(p),
        Outcome::Witness(w) => Err(Error::NotMonotone(w)),
    }
}

/// All pure equilibria in lexicographic order, by exhaustive scan.
pub fn pure_equilibria(game: &SupermodularGame) -> Vec<GridPoint> {
    let mut best: HashMap<(usize, GridPoint), Q> = HashMap::new();
    let mut out = Vec::new();
    for p in game.profile_box.points() {
        let ok = (0..game.players()).all(|i| {
            let key = game.with_block(&p, i, &game.boxes[i].low);
            let b = best.entry((i, key)).or_insert_with(|| game.best_value(i, &p));
            game.utility(i, &p) == *b
        });
        if ok {
            out.push(p);
        }
    }
    out
}

const CHECK_SEED: u64 = 0x5eed_c2c3;

/// Searches for a violation of supermodularity in own strategy (C2) or
/// increasing differences (C3). Exhaustive when a player's checks fit in
/// `sample_budget`, otherwise `sample_budget` seeded random probes.
pub fn check_c2_c3(game: &SupermodularGame, sample_budget: usize) -> Option<PropertyViolation> {
    check_c2_c3_seeded(game, sample_budget, CHECK_SEED)
}

pub fn check_c2_c3_seeded(game: &SupermodularGame, sample_budget: usize, seed: u64) -> Option<PropertyViolation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..game.players() {
        let own: Vec<GridPoint> = game.boxes[i].points().collect();
        let others = others_box(game, i);
        let rest: Vec<GridPoint> = others.points().collect();
        let exhaustive = (own.len() as u128).pow(2).saturating_mul((rest.len() as u128).pow(2)) <= sample_budget as u128;
        if exhaustive {
            if let Some(v) = c2_exhaustive(game, i, &own, &rest).or_else(|| c3_exhaustive(game, i, &own, &rest)) {
                return Some(v);
            }
        } else {
            for _ in 0..sample_budget {
                let p = random_in(game.profile_box(), &mut rng);
                let x = random_in(&game.boxes[i], &mut rng);
                let y = random_in(&game.boxes[i], &mut rng);
                if let Some(v) = c2_at(game, i, &p, &x, &y) {
                    return Some(v);
                }
                let (a, b) = (random_in(&game.boxes[i], &mut rng), random_in(&game.boxes[i], &mut rng));
                let (c, d) = (random_in(game.profile_box(), &mut rng), random_in(game.profile_box(), &mut rng));
                if let Some(v) = c3_at(game, i, &a.meet(&b), &a.join(&b), &c.meet(&d), &c.join(&d)) {
                    return Some(v);
                }
            }
        }
    }
    None
}

/// The profile box with player `i`'s block collapsed to its lowest point.
fn others_box(game: &SupermodularGame, i: usize) -> GridBox {
    let low = game.profile_box.low.clone();
    let high = game.with_block(&game.profile_box.high, i, &game.boxes[i].low);
    GridBox { low, high }
}

fn random_in<R: Rng>(bx: &GridBox, rng: &mut R) -> GridPoint {
    GridPoint::new((0..bx.dims()).map(|c| rng.gen_range(bx.low[c]..=bx.high[c])).collect())
}

fn c2_at(game: &SupermodularGame, i: usize, rest: &GridPoint, x: &GridPoint, y: &GridPoint) -> Option<PropertyViolation> {
    let (px, py) = (game.with_block(rest, i, x), game.with_block(rest, i, y));
    let (pj, pm) = (px.join(&py), px.meet(&py));
    let u = |p: &GridPoint| game.utility(i, p);
    (u(&px) + u(&py) > u(&pj) + u(&pm)).then(|| PropertyViolation::Supermodularity { player: i, x: px, y: py })
}

fn c3_at(
    game: &SupermodularGame,
    i: usize,
    x: &GridPoint,
    x_prime: &GridPoint,
    y: &GridPoint,
    y_prime: &GridPoint,
) -> Option<PropertyViolation> {
    let u = |own: &GridPoint, rest: &GridPoint| game.utility(i, &game.with_block(rest, i, own));
    let violated = u(x_prime, y_prime) - u(x, y_prime) < u(x_prime, y) - u(x, y);
    violated.then(|| PropertyViolation::IncreasingDifferences {
        player: i,
        x: x.clone(),
        x_prime: x_prime.clone(),
        y: game.with_block(y, i, &game.boxes[i].low),
        y_prime: game.with_block(y_prime, i, &game.boxes[i].low),
    })
}

fn c2_exhaustive(game: &SupermodularGame, i: usize, own: &[GridPoint], rest: &[GridPoint]) -> Option<PropertyViolation> {
    for r in rest {
        for (a, x) in own.iter().enumerate() {
            for y in &own[a + 1..] {
                if x <= y || y <= x {
                    continue;
                }
                if let Some(v) = c2_at(game, i, r, x, y) {
                    return Some(v);
                }
            }
        }
    }
    None
}

fn c3_exhaustive(game: &SupermodularGame, i: usize, own: &[GridPoint], rest: &[GridPoint]) -> Option<PropertyViolation> {
    for x in own {
        for x_prime in own.iter().filter(|&xp| x <= xp && xp != x) {
            for y in rest {
                for y_prime in rest.iter().filter(|&yp| y <= yp && yp != y) {
                    if let Some(v) = c3_at(game, i, x, x_prime, y, y_prime) {
                        return Some(v);
                    }
                }
            }
        }
    }
    None
}

fn table_game(boxes: Vec<GridBox>, table: Vec<Vec<Q>>) -> Result<SupermodularGame> {
    let probe = SupermodularGame::new(boxes.clone(), |_, _| Q::zero())?;
    let count = probe.profile_box.num_points();
    if table.len() != boxes.len() || table.iter().any(|t| t.len() as u128 != count) {
        return Err(Error::MalformedInstance(format!(
            "utility table needs {} rows of {count} entries",
            boxes.len()
        )));
    }
    let shape = probe.grid_shape();
    let low = probe.profile_box.low.clone();
    SupermodularGame::new(boxes, move |i, p| {
        let x = GridPoint::new(p.coords().iter().zip(low.coords()).map(|(a, l)| a - l + 1).collect());
        table[i][shape.index_of(&x)].clone()
    })
}

/// A utility table game over explicit strategy boxes.
pub fn table_game_from_spec(boxes: Vec<GridBox>, table: Vec<Vec<Q>>) -> Result<SupermodularGame> {
    let spec = GameSpec { strategy_boxes: boxes, payoff: Payoff::Table { table } };
    SupermodularGame::from_spec(spec)
}

/// Effort games `u_i(s) = alpha_i * s_i * sum_{j != i} s_j - C_i(s_i)` with
/// efforts `s_i in 0..costs[i].len()`.
pub fn diamond_search(alpha: &[Q], costs: &[Vec<Q>]) -> Result<SupermodularGame> {
    if alpha.len() != costs.len() || alpha.is_empty() {
        return Err(Error::MalformedInstance("need one alpha and one cost table per player".into()));
    }
    if alpha.iter().any(|a| !a.is_positive()) || costs.iter().any(Vec::is_empty) {
        return Err(Error::MalformedInstance("alphas must be positive and cost tables non-empty".into()));
    }
    let (alpha, costs) = (alpha.to_vec(), costs.to_vec());
    let spec = GameSpec {
        strategy_boxes: costs
            .iter()
            .map(|c| GridBox { low: GridPoint::new(vec![0]), high: GridPoint::new(vec![c.len() as i64 - 1]) })
            .collect(),
        payoff: Payoff::DiamondSearch { alpha: alpha.clone(), costs: costs.clone() },
    };
    let mut game = SupermodularGame::new(spec.strategy_boxes.clone(), move |i, s| {
        let others: i64 = s.sum() - s[i];
        &alpha[i] * qi(s[i] * others) - &costs[i][s[i] as usize]
    })?;
    game.spec = Some(spec);
    Ok(game)
}

fn neg_sq_dist<'a>(pairs: impl Iterator<Item = (&'a i64, &'a i64)>) -> Q {
    qi(-pairs.map(|(a, b)| (a - b) * (a - b)).sum::<i64>())
}

/// Two `d`-dimensional players with `u_1 = -|x - y|^2` and
/// `u_2 = -|f(x) - y|^2`; equilibria are exactly `(x, x)` for `x` in
/// `Fix(f)`.
pub fn game_from_monotone(f: &TableFn) -> SupermodularGame {
    let shape = f.shape().clone();
    let d = shape.dims();
    let f = f.clone();
    let bx = shape.full_box();
    SupermodularGame::new(vec![bx.clone(), bx], move |i, p| {
        let (x, y) = p.coords().split_at(d);
        if i == 0 {
            neg_sq_dist(x.iter().zip(y))
        } else {
            let fx = f.get(&GridPoint::new(x.to_vec()));
            neg_sq_dist(fx.coords().iter().zip(y))
        }
    })
    .expect("non-empty")
}

/// Coordinate bookkeeping of the many-player reduction. Positions are the
/// coordinates in the order `T` (players sorted by dimension, stable); the
/// label of position `p` (0-based) is `p mod d`.
#[derive(Clone, Debug)]
pub struct MultiLayout {
    d: usize,
    /// Profile coordinate at each position.
    coord_at: Vec<usize>,
    /// Player owning each position.
    owner: Vec<usize>,
    /// Position each coordinate's best response reads, or for `pos < d` the
    /// positions forming `x'` in label order.
    sources: Vec<Source>,
}

#[derive(Clone, Debug)]
enum Source {
    Apply(Vec<usize>),
    Copy(usize),
}

impl MultiLayout {
    pub fn new(dims: &[usize], d: usize) -> Result<Self> {
        let total: usize = dims.iter().sum();
        let max = dims.iter().copied().max().unwrap_or(0);
        if d == 0 || dims.iter().any(|&di| di == 0) {
            return Err(Error::MalformedInstance("dimensions must be positive".into()));
        }
        if total < 2 * d || total - max < d {
            return Err(Error::MalformedInstance(format!(
                "player dimensions {dims:?} need sum >= {} and sum - max >= {d}",
                2 * d
            )));
        }
        let mut order: Vec<usize> = (0..dims.len()).collect();
        order.sort_by_key(|&i| dims[i]);
        let starts: Vec<usize> = dims.iter().scan(0, |acc, &di| { let s = *acc; *acc += di; Some(s) }).collect();
        let mut coord_at = Vec::with_capacity(total);
        let mut owner = Vec::with_capacity(total);
        let mut first_pos = vec![0; dims.len()];
        for &i in &order {
            first_pos[i] = coord_at.len();
            for c in 0..dims[i] {
                coord_at.push(starts[i] + c);
                owner.push(i);
            }
        }
        let last = *order.last().expect("non-empty");
        let mut sources = Vec::with_capacity(total);
        for pos in 0..total {
            let r = owner[pos];
            let src = if pos < d {
                let t = first_pos[r];
                if dims[r] <= d {
                    Source::Apply((0..t).chain(t + d..2 * d).collect())
                } else {
                    let tail = total - d;
                    let mut by_label = vec![0; d];
                    for p in tail..total {
                        by_label[p % d] = p;
                    }
                    Source::Apply(by_label)
                }
            } else {
                let label = pos % d;
                if owner[label] != r {
                    Source::Copy(label)
                } else {
                    let p = (first_pos[last]..first_pos[last] + dims[last])
                        .find(|&p| p % d == label)
                        .expect("the last player covers every label");
                    Source::Copy(p)
                }
            };
            sources.push(src);
        }
        Ok(Self { d, coord_at, owner, sources })
    }

    fn beta(&self, f: &TableFn, profile: &GridPoint, pos: usize) -> i64 {
        match &self.sources[pos] {
            Source::Copy(p) => profile[self.coord_at[*p]],
            Source::Apply(ps) => {
                let x = GridPoint::new(ps.iter().map(|&p| profile[self.coord_at[p]]).collect());
                f.get(&x)[pos]
            }
        }
    }

    /// The `d`-vector of a profile whose equally labeled coordinates agree.
    pub fn labeled_point(&self, profile: &GridPoint) -> Option<GridPoint> {
        let x: Vec<i64> = (0..self.d).map(|p| profile[self.coord_at[p]]).collect();
        (0..self.coord_at.len())
            .all(|p| profile[self.coord_at[p]] == x[p % self.d])
            .then(|| GridPoint::new(x))
    }

    /// The profile carrying `x` on every coordinate of matching label.
    pub fn profile_of(&self, x: &GridPoint) -> GridPoint {
        let mut p = vec![0; self.coord_at.len()];
        for (pos, &c) in self.coord_at.iter().enumerate() {
            p[c] = x[pos % self.d];
        }
        GridPoint::new(p)
    }
}

/// The many-player reduction: players with dimensions `dims` whose
/// coordinates are labelled cyclically by the coordinates of `f`, with
/// `u_i = -sum_{j in Co(i)} (x_j - beta_j(x))^2`.
pub fn game_from_monotone_multi(f: &TableFn, dims: &[usize]) -> Result<(SupermodularGame, MultiLayout)> {
    let shape = f.shape().clone();
    let d = shape.dims();
    let layout = MultiLayout::new(dims, d)?;
    let mut sides = vec![0; layout.coord_at.len()];
    for (pos, &c) in layout.coord_at.iter().enumerate() {
        sides[c] = shape.sides()[pos % d];
    }
    let mut boxes = Vec::with_capacity(dims.len());
    let mut c = 0;
    for &di in dims {
        boxes.push(GridBox {
            low: GridPoint::splat(di, 1),
            high: GridPoint::new(sides[c..c + di].to_vec()),
        });
        c += di;
    }
    let (f, lay) = (f.clone(), layout.clone());
    let game = SupermodularGame::new(boxes, move |i, p| {
        let mut s = 0i64;
        for pos in (0..lay.coord_at.len()).filter(|&pos| lay.owner[pos] == i) {
            let diff = p[lay.coord_at[pos]] - lay.beta(&f, p, pos);
            s += diff * diff;
        }
        qi(-s)
    })?;
    Ok((game, layout))
}

impl SupermodularGame {
    /// A single player with utility `u`; convenient for property checks.
    pub fn single(bx: GridBox, u: impl Fn(&GridPoint) -> Q + Send + Sync + 'static) -> Self {
        Self::new(vec![bx], move |_, p| u(p)).expect("non-empty")
    }
}

/// Whether every utility is exactly modular in the player's own strategy,
/// i.e. the supermodularity inequality holds with equality everywhere.
pub fn c2_tight(game: &SupermodularGame) -> bool {
    (0..game.players()).all(|i| {
        let own: Vec<GridPoint> = game.boxes[i].points().collect();
        others_box(game, i).points().all(|r| {
            own.iter().all(|x| {
                own.iter().all(|y| {
                    let (px, py) = (game.with_block(&r, i, x), game.with_block(&r, i, y));
                    let u = |p: &GridPoint| game.utility(i, p);
                    u(&px) + u(&py) == u(&px.join(&py)) + u(&px.meet(&py))
                })
            })
        })
    })
}
