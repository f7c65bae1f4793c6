//! Shapley stochastic games: `x_i = Val(A^i + sum_r P^i(r) x_r)`, solved
//! either by exact contraction iteration or on a discretized grid.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use tarski_core::{GridFn, GridPoint, GridShape, Oracle, Outcome, SolverKind};

use super::plan::{round_dyadic, PrecisionPlan};
use crate::error::{Error, Result};
use crate::matrix::matrix_game_value_only;
use crate::rational::{serde_q, Q};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapleyState {
    /// `m x n` payoffs to the maximizing row player.
    #[serde(with = "serde_q::matrix")]
    pub rewards: Vec<Vec<Q>>,
    /// `transitions[j][k][r]`: probability of moving to state `r` after
    /// actions `(j, k)`. Each row sums to strictly less than 1.
    #[serde(with = "serde_q::tensor")]
    pub transitions: Vec<Vec<Vec<Q>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapleyInstance {
    pub states: Vec<ShapleyState>,
    pub start: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapleyRoute {
    ContractionIteration,
    TarskiGrid,
}

impl std::str::FromStr for ShapleyRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contraction" | "contraction_iteration" => Ok(Self::ContractionIteration),
            "tarski" | "tarski_grid" => Ok(Self::TarskiGrid),
            _ => Err(Error::Parse(format!("unknown route {s:?} (expected contraction or tarski)"))),
        }
    }
}

impl ShapleyInstance {
    pub fn new(states: Vec<ShapleyState>, start: usize) -> Result<Self> {
        let inst = Self { states, start };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.states.len();
        let bad = |m: String| Err(Error::MalformedInstance(m));
        if n == 0 || self.start >= n {
            return bad("need at least one state and a valid start".into());
        }
        for (i, s) in self.states.iter().enumerate() {
            let rows = s.rewards.len();
            let cols = s.rewards.first().map_or(0, Vec::len);
            if rows == 0 || cols == 0 || s.rewards.iter().any(|r| r.len() != cols) {
                return bad(format!("state {i}: reward matrix must be non-empty and rectangular"));
            }
            if s.transitions.len() != rows || s.transitions.iter().any(|r| r.len() != cols) {
                return bad(format!("state {i}: transitions must match the {rows}x{cols} reward matrix"));
            }
            for (j, row) in s.transitions.iter().enumerate() {
                for (k, p) in row.iter().enumerate() {
                    if p.len() != n || p.iter().any(Signed::is_negative) {
                        return bad(format!("state {i}, actions ({j},{k}): need {n} non-negative probabilities"));
                    }
                    if p.iter().sum::<Q>() >= Q::one() {
                        return bad(format!("state {i}, actions ({j},{k}): probabilities must sum to less than 1"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let inst: Self = serde_json::from_value(value)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// The minimum stopping probability `q`.
    pub fn halting_probability(&self) -> Q {
        self.states
            .iter()
            .flat_map(|s| s.transitions.iter().flatten())
            .map(|p| Q::one() - p.iter().sum::<Q>())
            .min()
            .expect("validated")
    }

    /// `M = max |A^i_{j,k}|`.
    pub fn reward_bound(&self) -> Q {
        self.states
            .iter()
            .flat_map(|s| s.rewards.iter().flatten())
            .map(Signed::abs)
            .max()
            .expect("validated")
    }

    /// A one-state game with a 1x1 reward `a` and self-loop probability `p`.
    pub fn single(a: Q, p: Q) -> Result<Self> {
        Self::new(vec![ShapleyState { rewards: vec![vec![a]], transitions: vec![vec![vec![p]]] }], 0)
    }
}

fn value_map_unchecked(inst: &ShapleyInstance, x: &[Q]) -> Result<Vec<Q>> {
    inst.states
        .iter()
        .map(|s| {
            let b: Vec<Vec<Q>> = s
                .rewards
                .iter()
                .zip(&s.transitions)
                .map(|(row, trow)| {
                    row.iter()
                        .zip(trow)
                        .map(|(a, p)| a + p.iter().zip(x).map(|(pr, xr)| pr * xr).sum::<Q>())
                        .collect()
                })
                .collect();
            matrix_game_value_only(&b)
        })
        .collect()
}

/// `F(x)_i = Val(B^i(x))` with `B^i(x)_{j,k} = A^i_{j,k} + sum_r P^i_{j,k}(r) x_r`.
pub fn shapley_value_map(inst: &ShapleyInstance, x: &[Q]) -> Result<Vec<Q>> {
    if x.len() != inst.states.len() {
        return Err(Error::MalformedInstance(format!("expected {} values, got {}", inst.states.len(), x.len())));
    }
    let bound = inst.reward_bound() / inst.halting_probability();
    if x.iter().any(|v| v.abs() > bound) {
        return Err(Error::MalformedInstance(format!("values must lie in [-{bound}, {bound}]")));
    }
    value_map_unchecked(inst, x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapleySolution {
    #[serde(with = "serde_q::vec")]
    pub values: Vec<Q>,
    pub route: ShapleyRoute,
    /// Iterations (contraction) or oracle queries (grid).
    pub steps: u64,
    /// `|F(values) - values|_inf`.
    #[serde(with = "serde_q")]
    pub residual: Q,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PrecisionPlan>,
}

fn sup_dist(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or_else(Q::zero)
}

/// Values within `eps` of the exact value vector (sup norm).
pub fn shapley_solve(inst: &ShapleyInstance, eps: &Q, route: ShapleyRoute) -> Result<ShapleySolution> {
    inst.validate()?;
    if !eps.is_positive() {
        return Err(Error::Precision("eps must be positive".into()));
    }
    match route {
        ShapleyRoute::ContractionIteration => contraction(inst, eps),
        ShapleyRoute::TarskiGrid => tarski_grid(inst, eps, SolverKind::Dqy),
    }
}

pub fn shapley_solve_grid_with(inst: &ShapleyInstance, eps: &Q, solver: SolverKind) -> Result<ShapleySolution> {
    inst.validate()?;
    tarski_grid(inst, eps, solver)
}

/// Iterates `F` from 0, rounding to a dyadic grid of mesh at most
/// `eps q^2 / 8` to keep the rationals small, until the residual drops below
/// `eps q`; then `|x - r*| <= residual / q < eps`.
fn contraction(inst: &ShapleyInstance, eps: &Q) -> Result<ShapleySolution> {
    let q = inst.halting_probability();
    let target = eps * &q;
    let mesh = &target * &q / Q::from_integer(BigInt::from(8));
    let mut bits = 0u64;
    while Q::new(BigInt::one(), BigInt::one() << bits) > mesh {
        bits += 1;
    }
    let mut x = vec![Q::zero(); inst.states.len()];
    let mut steps = 0u64;
    loop {
        let fx = value_map_unchecked(inst, &x)?;
        let residual = sup_dist(&fx, &x);
        if residual < target {
            return Ok(ShapleySolution { values: x, route: ShapleyRoute::ContractionIteration, steps, residual, plan: None });
        }
        x = fx.iter().map(|v| round_dyadic(v, bits)).collect();
        steps += 1;
    }
}

/// `H'(v)_i = floor(M' F(v / M')_i)` on `{-K..K}^n`, shifted to
/// `[1..2K+1]^n`.
pub struct DiscretizedShapley<'a> {
    inst: &'a ShapleyInstance,
    shape: GridShape,
    resolution: BigInt,
    offset: i64,
}

impl<'a> DiscretizedShapley<'a> {
    pub fn new(inst: &'a ShapleyInstance, plan: &PrecisionPlan) -> Result<Self> {
        plan.validate()?;
        let side = 2 * (plan.offset - 1) + 1;
        let shape = GridShape::uniform(inst.states.len(), side)?;
        Ok(Self { inst, shape, resolution: BigInt::from(plan.grid_side), offset: plan.offset })
    }

    pub fn to_values(&self, x: &GridPoint) -> Vec<Q> {
        x.coords().iter().map(|&c| Q::new(BigInt::from(c - self.offset), self.resolution.clone())).collect()
    }
}

impl GridFn for DiscretizedShapley<'_> {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> tarski_core::Result<GridPoint> {
        let fx = value_map_unchecked(self.inst, &self.to_values(x)).map_err(|e| tarski_core::Error::Evaluation(Box::new(e)))?;
        let res = Q::from_integer(self.resolution.clone());
        let coords = fx
            .iter()
            .map(|v| {
                let s = v * &res;
                s.numer().div_floor(s.denom()).to_i64().expect("bounded by the grid") + self.offset
            })
            .collect();
        Ok(GridPoint::new(coords))
    }
}

fn tarski_grid(inst: &ShapleyInstance, eps: &Q, solver: SolverKind) -> Result<ShapleySolution> {
    let plan = PrecisionPlan::for_shapley(inst, eps)?;
    let mut oracle = Oracle::new(DiscretizedShapley::new(inst, &plan)?);
    let bx = oracle.full_box().clone();
    let out = solver.run(&mut oracle, &bx, false)?;
    let v = match out.outcome {
        Outcome::FixedPoint(v) => v,
        Outcome::Witness(w) => {
            return Err(Error::Core(tarski_core::Error::Internal(format!(
                "discretized Shapley map reported non-monotone pair {w:?}"
            ))))
        }
    };
    let values = oracle.inner().to_values(&v);
    let residual = sup_dist(&value_map_unchecked(inst, &values)?, &values);
    Ok(ShapleySolution { values, route: ShapleyRoute::TarskiGrid, steps: out.queries, residual, plan: Some(plan) })
}

/// A random game with integer rewards in `[-3, 3]` and, per action pair, a
/// continuation probability in {1/4, 1/2, 3/4} split over the states by
/// random integer weights.
pub fn random_shapley<R: rand::Rng>(states: usize, actions: usize, rng: &mut R) -> ShapleyInstance {
    let cont = [Q::new(1.into(), 4.into()), Q::new(1.into(), 2.into()), Q::new(3.into(), 4.into())];
    let states_vec = (0..states)
        .map(|_| {
            let rewards = (0..actions)
                .map(|_| (0..actions).map(|_| Q::from_integer(rng.gen_range(-3..=3).into())).collect())
                .collect();
            let transitions = (0..actions)
                .map(|_| {
                    (0..actions)
                        .map(|_| {
                            let w: Vec<i64> = (0..states).map(|_| rng.gen_range(0..=3)).collect();
                            let total: i64 = w.iter().sum();
                            let stay = &cont[rng.gen_range(0..3)];
                            w.iter()
                                .map(|&wi| if total == 0 { Q::zero() } else { stay * Q::new(wi.into(), total.into()) })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            ShapleyState { rewards, transitions }
        })
        .collect();
    ShapleyInstance::new(states_vec, 0).expect("generated games are well formed")
}
