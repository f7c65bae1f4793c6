//! Simple stochastic games: the min-max-linear value map, an exact
//! brute-force oracle over positional strategies, and the discounted,
//! discretized monotone map solved through the grid solvers.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use tarski_core::{GridFn, GridPoint, GridShape, Oracle, Outcome, SolverKind};

use super::plan::PrecisionPlan;
use crate::error::{Error, Result};
use crate::rational::{best_rational_approx, serde_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Random,
    Max,
    Min,
    ZeroSink,
    OneSink,
}

impl VertexKind {
    pub fn is_sink(self) -> bool {
        matches!(self, Self::ZeroSink | Self::OneSink)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub to: usize,
    /// Transition probability; only random vertices carry one.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_q::option")]
    pub p: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub kind: VertexKind,
    #[serde(default)]
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsgInstance {
    pub vertices: Vec<Vertex>,
    pub start: usize,
}

impl SsgInstance {
    pub fn new(vertices: Vec<Vertex>, start: usize) -> Result<Self> {
        let inst = Self { vertices, start };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        let bad = |m: String| Err(Error::MalformedInstance(m));
        if self.start >= n {
            return bad(format!("start vertex {} out of range", self.start));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if let Some(e) = v.edges.iter().find(|e| e.to >= n) {
                return bad(format!("vertex {i} has an edge to unknown vertex {}", e.to));
            }
            match v.kind {
                VertexKind::ZeroSink | VertexKind::OneSink => {
                    if !v.edges.is_empty() {
                        return bad(format!("sink {i} has outgoing edges"));
                    }
                }
                VertexKind::Max | VertexKind::Min => {
                    if v.edges.is_empty() {
                        return bad(format!("vertex {i} has no outgoing edge"));
                    }
                    if v.edges.iter().any(|e| e.p.is_some()) {
                        return bad(format!("player vertex {i} carries edge probabilities"));
                    }
                }
                VertexKind::Random => {
                    if v.edges.is_empty() {
                        return bad(format!("vertex {i} has no outgoing edge"));
                    }
                    let mut sum = Q::zero();
                    for e in &v.edges {
                        match &e.p {
                            Some(p) if !p.is_negative() => sum += p,
                            _ => return bad(format!("random vertex {i} needs non-negative edge probabilities")),
                        }
                    }
                    if !sum.is_one() {
                        return bad(format!("probabilities at vertex {i} sum to {sum}, not 1"));
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

    /// Indices of the non-sink vertices, in order.
    pub fn inner_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| !self.vertices[i].kind.is_sink()).collect()
    }

    /// Least common multiple of all probability denominators.
    pub fn probability_denominator(&self) -> BigInt {
        self.vertices
            .iter()
            .flat_map(|v| v.edges.iter().filter_map(|e| e.p.as_ref()))
            .fold(BigInt::one(), |l, p| l.lcm(p.denom()))
    }

    fn sink_value(&self, i: usize) -> Option<Q> {
        match self.vertices[i].kind {
            VertexKind::ZeroSink => Some(Q::zero()),
            VertexKind::OneSink => Some(Q::one()),
            _ => None,
        }
    }

    pub fn random(edges: &[(usize, Q)]) -> Vertex {
        Vertex { kind: VertexKind::Random, edges: edges.iter().map(|(to, p)| Edge { to: *to, p: Some(p.clone()) }).collect() }
    }

    pub fn player(kind: VertexKind, targets: &[usize]) -> Vertex {
        Vertex { kind, edges: targets.iter().map(|&to| Edge { to, p: None }).collect() }
    }

    pub fn sink(kind: VertexKind) -> Vertex {
        Vertex { kind, edges: Vec::new() }
    }
}

/// One application of the value equations: random vertices average,
/// max/min vertices take the extreme successor value, sinks are constant.
pub fn ssg_value_map(inst: &SsgInstance, x: &[Q]) -> Result<Vec<Q>> {
    if x.len() != inst.vertices.len() {
        return Err(Error::MalformedInstance(format!("expected {} values, got {}", inst.vertices.len(), x.len())));
    }
    if x.iter().any(|v| v.is_negative() || *v > Q::one()) {
        return Err(Error::MalformedInstance("values must lie in [0, 1]".into()));
    }
    Ok(inst
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| match v.kind {
            VertexKind::Random => v.edges.iter().map(|e| e.p.as_ref().expect("validated") * &x[e.to]).sum(),
            VertexKind::Max => v.edges.iter().map(|e| &x[e.to]).max().expect("validated").clone(),
            VertexKind::Min => v.edges.iter().map(|e| &x[e.to]).min().expect("validated").clone(),
            _ => inst.sink_value(i).expect("sink"),
        })
        .collect())
}

/// `F^beta(x) = (1 - beta) F(x)` on non-sink vertices; sinks keep their
/// exact values.
pub fn ssg_discounted_map(inst: &SsgInstance, beta: &Q, x: &[Q]) -> Result<Vec<Q>> {
    let fx = ssg_value_map(inst, x)?;
    let keep = Q::one() - beta;
    Ok(fx
        .into_iter()
        .enumerate()
        .map(|(i, v)| if inst.vertices[i].kind.is_sink() { v } else { v * &keep })
        .collect())
}

pub const DEFAULT_STRATEGY_BUDGET: u128 = 1 << 20;

/// Exact values by enumerating positional strategy pairs. For each pair the
/// vertices that cannot reach the 1-sink get value 0 and the remaining
/// absorbing system is solved exactly.
pub fn ssg_brute_force(inst: &SsgInstance) -> Result<Vec<Q>> {
    ssg_brute_force_with_budget(inst, DEFAULT_STRATEGY_BUDGET)
}

pub fn ssg_brute_force_with_budget(inst: &SsgInstance, budget: u128) -> Result<Vec<Q>> {
    inst.validate()?;
    let maxv: Vec<usize> = (0..inst.vertices.len()).filter(|&i| inst.vertices[i].kind == VertexKind::Max).collect();
    let minv: Vec<usize> = (0..inst.vertices.len()).filter(|&i| inst.vertices[i].kind == VertexKind::Min).collect();
    let count = |vs: &[usize]| vs.iter().fold(1u128, |acc, &i| acc.saturating_mul(inst.vertices[i].edges.len() as u128));
    let pairs = count(&maxv).saturating_mul(count(&minv));
    if pairs > budget {
        return Err(Error::Budget(format!("{pairs} strategy pairs exceed the budget of {budget}")));
    }
    let mut choice = vec![0usize; inst.vertices.len()];
    let mut best: Option<Vec<Q>> = None;
    for_each_choice(inst, &maxv, &mut choice, &mut |choice| {
        let mut worst: Option<Vec<Q>> = None;
        let mut inner = choice.to_vec();
        for_each_choice(inst, &minv, &mut inner, &mut |full| {
            let vals = chain_values(inst, full);
            worst = Some(match worst.take() {
                None => vals,
                Some(w) => w.into_iter().zip(vals).map(|(a, b)| a.min(b)).collect(),
            });
        });
        let worst = worst.expect("at least one strategy");
        best = Some(match best.take() {
            None => worst,
            Some(b) => b.into_iter().zip(worst).map(|(a, c)| a.max(c)).collect(),
        });
    });
    Ok(best.expect("at least one strategy"))
}

fn for_each_choice(inst: &SsgInstance, vs: &[usize], choice: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    match vs.split_first() {
        None => f(choice),
        Some((&v, rest)) => {
            for c in 0..inst.vertices[v].edges.len() {
                choice[v] = c;
                for_each_choice(inst, rest, choice, f);
            }
        }
    }
}

/// Absorption probabilities into the 1-sink of the Markov chain fixed by
/// `choice` at player vertices.
fn chain_values(inst: &SsgInstance, choice: &[usize]) -> Vec<Q> {
    let n = inst.vertices.len();
    let succ = |i: usize| -> Vec<(usize, Q)> {
        let v = &inst.vertices[i];
        match v.kind {
            VertexKind::Random => v.edges.iter().map(|e| (e.to, e.p.clone().expect("validated"))).collect(),
            VertexKind::Max | VertexKind::Min => vec![(v.edges[choice[i]].to, Q::one())],
            _ => Vec::new(),
        }
    };
    let succs: Vec<Vec<(usize, Q)>> = (0..n).map(succ).collect();
    let mut reaches = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| inst.vertices[i].kind == VertexKind::OneSink).collect();
    for &i in &queue {
        reaches[i] = true;
    }
    while let Some(j) = queue.pop_front() {
        for i in 0..n {
            if !reaches[i] && succs[i].iter().any(|(t, p)| *t == j && p.is_positive()) {
                reaches[i] = true;
                queue.push_back(i);
            }
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&i| reaches[i] && !inst.vertices[i].kind.is_sink()).collect();
    let pos: Vec<Option<usize>> = (0..n).map(|i| unknown.iter().position(|&u| u == i)).collect();
    let m = unknown.len();
    let mut a = vec![vec![Q::zero(); m + 1]; m];
    for (r, &i) in unknown.iter().enumerate() {
        a[r][r] = Q::one();
        for (t, p) in &succs[i] {
            if inst.vertices[*t].kind == VertexKind::OneSink {
                a[r][m] += p;
            } else if let Some(c) = pos[*t] {
                a[r][c] -= p;
            }
        }
    }
    let sol = solve_linear(a);
    (0..n)
        .map(|i| match (inst.vertices[i].kind, pos[i]) {
            (VertexKind::OneSink, _) => Q::one(),
            (_, Some(c)) => sol[c].clone(),
            _ => Q::zero(),
        })
        .collect()
}

/// Gauss-Jordan elimination on an augmented, non-singular system.
fn solve_linear(mut a: Vec<Vec<Q>>) -> Vec<Q> {
    let m = a.len();
    for c in 0..m {
        let r = (c..m).find(|&r| !a[r][c].is_zero()).expect("absorbing system is non-singular");
        a.swap(c, r);
        let p = a[c][c].clone();
        for v in a[c].iter_mut() {
            *v /= &p;
        }
        let row = a[c].clone();
        for (i, other) in a.iter_mut().enumerate() {
            if i != c && !other[c].is_zero() {
                let k = other[c].clone();
                for (v, pv) in other.iter_mut().zip(&row) {
                    *v -= &k * pv;
                }
            }
        }
    }
    a.into_iter().map(|r| r[m].clone()).collect()
}

/// Per-vertex integer data of `H(v)_i = floor(M (1 - beta) F(v / M)_i)`.
#[derive(Clone, Debug)]
enum Row {
    /// `floor(keep * sum_j coef_j * u_j / den)`, where the 1-sink reads `M`.
    Random { terms: Vec<(Term, BigInt)>, den: BigInt },
    Max(Vec<Term>),
    Min(Vec<Term>),
}

#[derive(Clone, Copy, Debug)]
enum Term {
    Var(usize),
    Zero,
    Top,
}

/// The discretized discounted map on `{0..M}^n`, shifted to the grid
/// `[1..M+1]^n` over the non-sink vertices.
#[derive(Clone, Debug)]
pub struct DiscretizedSsg {
    shape: GridShape,
    rows: Vec<Row>,
    grid_side: BigInt,
    keep_num: BigInt,
    keep_den: BigInt,
    small: Option<SmallRows>,
}

/// The same map in `i128` when every intermediate product provably fits.
#[derive(Clone, Debug)]
struct SmallRows {
    rows: Vec<SmallRow>,
    top: i128,
    keep_num: i128,
    keep_den: i128,
}

#[derive(Clone, Debug)]
enum SmallRow {
    Random { terms: Vec<(Term, i128)>, den: i128 },
    Max(Vec<Term>),
    Min(Vec<Term>),
}

impl DiscretizedSsg {
    pub fn new(inst: &SsgInstance, plan: &PrecisionPlan) -> Result<Self> {
        plan.validate()?;
        let beta = plan.beta.clone().ok_or_else(|| Error::Precision("an SSG plan needs beta".into()))?;
        let inner = inst.inner_vertices();
        if inner.is_empty() {
            return Err(Error::MalformedInstance("the game has no non-sink vertex".into()));
        }
        let term = |t: usize| match inst.vertices[t].kind {
            VertexKind::ZeroSink => Term::Zero,
            VertexKind::OneSink => Term::Top,
            _ => Term::Var(inner.iter().position(|&u| u == t).expect("non-sink")),
        };
        let rows: Vec<Row> = inner
            .iter()
            .map(|&i| {
                let v = &inst.vertices[i];
                match v.kind {
                    VertexKind::Random => {
                        let den = v.edges.iter().fold(BigInt::one(), |l, e| l.lcm(e.p.as_ref().expect("validated").denom()));
                        let terms = v
                            .edges
                            .iter()
                            .map(|e| {
                                let p = e.p.as_ref().expect("validated");
                                (term(e.to), p.numer() * (&den / p.denom()))
                            })
                            .collect();
                        Row::Random { terms, den }
                    }
                    VertexKind::Max => Row::Max(v.edges.iter().map(|e| term(e.to)).collect()),
                    _ => Row::Min(v.edges.iter().map(|e| term(e.to)).collect()),
                }
            })
            .collect();
        let keep = Q::one() - &beta;
        let grid_side = BigInt::from(plan.grid_side);
        let shape = GridShape::uniform(inner.len(), plan.grid_side + 1)?;
        let mut out = Self {
            shape,
            rows,
            grid_side,
            keep_num: keep.numer().clone(),
            keep_den: keep.denom().clone(),
            small: None,
        };
        out.small = out.small_rows();
        Ok(out)
    }

    fn small_rows(&self) -> Option<SmallRows> {
        let top = self.grid_side.to_i128()?;
        let keep_num = self.keep_num.to_i128()?;
        let keep_den = self.keep_den.to_i128()?;
        let mut rows = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            rows.push(match r {
                Row::Random { terms, den } => {
                    let coef_sum: BigInt = terms.iter().map(|(_, c)| c).sum();
                    // The weighted sum is at most coef_sum * top; scaling by
                    // keep_num must stay in range, as must den * keep_den.
                    let worst = coef_sum * &self.grid_side * &self.keep_num;
                    if worst.bits() >= 126 || (den * &self.keep_den).bits() >= 126 {
                        return None;
                    }
                    SmallRow::Random {
                        terms: terms.iter().map(|(t, c)| c.to_i128().map(|c| (*t, c))).collect::<Option<_>>()?,
                        den: den.to_i128()? * keep_den,
                    }
                }
                Row::Max(ts) | Row::Min(ts) => {
                    if (BigInt::from(top) * &self.keep_num).bits() >= 126 {
                        return None;
                    }
                    if matches!(r, Row::Max(_)) {
                        SmallRow::Max(ts.clone())
                    } else {
                        SmallRow::Min(ts.clone())
                    }
                }
            });
        }
        Some(SmallRows { rows, top, keep_num, keep_den })
    }

    fn eval_small(s: &SmallRows, u: &[i128]) -> Vec<i128> {
        let val = |t: &Term| match t {
            Term::Var(j) => u[*j],
            Term::Zero => 0,
            Term::Top => s.top,
        };
        s.rows
            .iter()
            .map(|r| match r {
                SmallRow::Random { terms, den } => {
                    let sum: i128 = terms.iter().map(|(t, c)| c * val(t)).sum();
                    (sum * s.keep_num).div_euclid(*den)
                }
                SmallRow::Max(ts) => (ts.iter().map(val).max().expect("edge") * s.keep_num).div_euclid(s.keep_den),
                SmallRow::Min(ts) => (ts.iter().map(val).min().expect("edge") * s.keep_num).div_euclid(s.keep_den),
            })
            .collect()
    }

    fn eval_big(&self, u: &[BigInt]) -> Vec<BigInt> {
        let val = |t: &Term| match t {
            Term::Var(j) => u[*j].clone(),
            Term::Zero => BigInt::zero(),
            Term::Top => self.grid_side.clone(),
        };
        self.rows
            .iter()
            .map(|r| match r {
                Row::Random { terms, den } => {
                    let sum: BigInt = terms.iter().map(|(t, c)| c * val(t)).sum();
                    (sum * &self.keep_num).div_floor(&(den * &self.keep_den))
                }
                Row::Max(ts) => (ts.iter().map(val).max().expect("edge") * &self.keep_num).div_floor(&self.keep_den),
                Row::Min(ts) => (ts.iter().map(val).min().expect("edge") * &self.keep_num).div_floor(&self.keep_den),
            })
            .collect()
    }

    /// `H` on unshifted values `u in {0..M}^n`.
    pub fn apply(&self, u: &[i64]) -> Vec<i64> {
        match &self.small {
            Some(s) => {
                let u: Vec<i128> = u.iter().map(|&v| v as i128).collect();
                Self::eval_small(s, &u).into_iter().map(|v| v as i64).collect()
            }
            None => {
                let u: Vec<BigInt> = u.iter().map(|&v| BigInt::from(v)).collect();
                self.eval_big(&u).into_iter().map(|v| v.to_i64().expect("bounded by M")).collect()
            }
        }
    }
}

impl GridFn for DiscretizedSsg {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> tarski_core::Result<GridPoint> {
        let u: Vec<i64> = x.coords().iter().map(|c| c - 1).collect();
        Ok(GridPoint::new(self.apply(&u).into_iter().map(|v| v + 1).collect()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SsgSolution {
    /// `v*/M` on non-sink vertices, exact values on sinks.
    #[serde(with = "serde_q::vec")]
    pub approx: Vec<Q>,
    #[serde(with = "serde_q::vec")]
    pub rounded: Vec<Q>,
    /// `|F^beta(approx) - approx|_inf`.
    #[serde(with = "serde_q")]
    pub residual: Q,
    pub queries: u64,
    pub solver: SolverKind,
    pub plan: PrecisionPlan,
}

impl SsgSolution {
    pub fn start_value(&self, inst: &SsgInstance) -> &Q {
        &self.rounded[inst.start]
    }
}

/// Solves the discretized discounted game with a grid solver (dqy unless
/// told otherwise) and rounds each coordinate to the closest rational with
/// denominator at most `plan.denominator_bound`.
pub fn ssg_solve_tarski(inst: &SsgInstance, plan: &PrecisionPlan) -> Result<SsgSolution> {
    ssg_solve_tarski_with(inst, plan, SolverKind::Dqy)
}

pub fn ssg_solve_tarski_with(inst: &SsgInstance, plan: &PrecisionPlan, solver: SolverKind) -> Result<SsgSolution> {
    inst.validate()?;
    plan.validate()?;
    let beta = plan.beta.clone().ok_or_else(|| Error::Precision("an SSG plan needs beta".into()))?;
    let bound = plan
        .denominator_bound
        .map(BigInt::from)
        .ok_or_else(|| Error::Precision("an SSG plan needs a denominator bound".into()))?;
    let inner = inst.inner_vertices();
    let mut approx: Vec<Q> = (0..inst.vertices.len()).map(|i| inst.sink_value(i).unwrap_or_else(Q::zero)).collect();
    let mut queries = 0;
    if !inner.is_empty() {
        let mut oracle = Oracle::new(DiscretizedSsg::new(inst, plan)?);
        let bx = oracle.full_box().clone();
        let out = solver.run(&mut oracle, &bx, false)?;
        queries = out.queries;
        let v = match out.outcome {
            Outcome::FixedPoint(v) => v,
            Outcome::Witness(w) => {
                return Err(Error::Core(tarski_core::Error::Internal(format!(
                    "discretized value map reported non-monotone pair {w:?}"
                ))))
            }
        };
        let m = Q::from_integer(BigInt::from(plan.grid_side));
        for (k, &i) in inner.iter().enumerate() {
            approx[i] = Q::from_integer(BigInt::from(v[k] - 1)) / &m;
        }
    }
    let fx = ssg_discounted_map(inst, &beta, &approx)?;
    let residual = fx.iter().zip(&approx).map(|(a, b)| (a - b).abs()).max().unwrap_or_else(Q::zero);
    let rounded = approx.iter().map(|a| best_rational_approx(a, &bound)).collect::<Result<_>>()?;
    Ok(SsgSolution { approx, rounded, residual, queries, solver, plan: plan.clone() })
}
