//! Piecewise-linear extension of a grid function over the Freudenthal
//! triangulation, an exact inner fixed-point search for it, and the
//! sublattice-halving solver built on top.
//!
//! Coordinates whose side in the current box is 1 are constant and carry no
//! simplex direction; all geometry happens on the remaining free coordinates.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{GridBox, GridPoint};
use crate::lp::feasible_point;
use crate::oracle::{GridFn, MonotonicityWitness, Oracle};
use crate::solvers::{Outcome, SolveOutcome};

pub type Q = BigRational;

fn q_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// The simplex with vertices `y^0 = base`, `y^i = y^(i-1) + e_(perm_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    pub base: GridPoint,
    /// Coordinate indices (0-based), one per step.
    pub perm: Vec<usize>,
}

impl Simplex {
    pub fn vertices(&self) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(self.perm.len() + 1);
        let mut y = self.base.clone();
        out.push(y.clone());
        for &i in &self.perm {
            y[i] += 1;
            out.push(y.clone());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub support: Vec<GridPoint>,
    pub u: GridPoint,
    pub v: GridPoint,
}

fn free_coords(bx: &GridBox) -> Vec<usize> {
    (0..bx.dims()).filter(|&i| bx.side(i) > 1).collect()
}

fn check_inside(x: &[Q], bx: &GridBox) -> Result<()> {
    if x.len() != bx.dims() {
        return Err(Error::ShapeMismatch { expected: bx.dims(), got: x.len() });
    }
    let inside = x.iter().enumerate().all(|(i, c)| *c >= q_int(bx.low[i]) && *c <= q_int(bx.high[i]));
    if !inside {
        return Err(Error::MalformedInput(format!("point {} lies outside the box {bx}", show(x))));
    }
    Ok(())
}

pub fn show(x: &[Q]) -> String {
    let parts: Vec<String> = x.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

/// Barycentric coordinates of `x` in `simplex`, if `x` lies in it.
pub fn barycentric_in(simplex: &Simplex, x: &[Q]) -> Option<Vec<Q>> {
    let y = &simplex.base;
    let in_perm = |i: usize| simplex.perm.contains(&i);
    if (0..x.len()).any(|i| !in_perm(i) && x[i] != q_int(y[i])) {
        return None;
    }
    let frac: Vec<Q> = simplex.perm.iter().map(|&i| &x[i] - q_int(y[i])).collect();
    let mut lambda = Vec::with_capacity(frac.len() + 1);
    let one = Q::one();
    lambda.push(&one - frac.first().unwrap_or(&Q::zero()));
    for w in frac.windows(2) {
        lambda.push(&w[0] - &w[1]);
    }
    if let Some(last) = frac.last() {
        lambda.push(last.clone());
    }
    if frac.is_empty() {
        lambda[0] = one;
    }
    lambda.iter().all(|l| !l.is_negative()).then_some(lambda)
}

/// Finds the simplex containing `x`: base is the floor of `x` kept one below
/// the top on free coordinates, and the permutation sorts fractional parts
/// in decreasing order, ties by ascending index.
pub fn locate_simplex(x: &[Q], bx: &GridBox) -> Result<(Simplex, Vec<Q>)> {
    check_inside(x, bx)?;
    let free = free_coords(bx);
    let mut base = bx.low.clone();
    for &i in &free {
        let fl = x[i].floor().to_integer().to_i64().expect("inside an i64 box");
        base[i] = fl.min(bx.high[i] - 1);
    }
    let mut perm = free;
    let frac = |i: usize| &x[i] - q_int(base[i]);
    perm.sort_by(|&a, &b| frac(b).cmp(&frac(a)).then(a.cmp(&b)));
    let simplex = Simplex { base, perm };
    let lambda = barycentric_in(&simplex, x).ok_or_else(|| Error::Internal("point not in its own simplex".into()))?;
    Ok((simplex, lambda))
}

/// Memoized `f` values, so that repeated vertex evaluations cost one query.
pub struct CachedOracle<'o, F> {
    oracle: &'o mut Oracle<F>,
    cache: HashMap<GridPoint, GridPoint>,
}

impl<'o, F: GridFn> CachedOracle<'o, F> {
    pub fn new(oracle: &'o mut Oracle<F>) -> Self {
        Self { oracle, cache: HashMap::new() }
    }

    pub fn get(&mut self, x: &GridPoint) -> Result<GridPoint> {
        if let Some(v) = self.cache.get(x) {
            return Ok(v.clone());
        }
        let v = self.oracle.query(x)?;
        self.cache.insert(x.clone(), v.clone());
        Ok(v)
    }

    pub fn oracle(&self) -> &Oracle<F> {
        self.oracle
    }
}

fn interpolate<F: GridFn>(
    f: &mut CachedOracle<'_, F>,
    simplex: &Simplex,
    lambda: &[Q],
    bx: &GridBox,
    clamp: bool,
) -> Result<Vec<Q>> {
    let mut out = vec![Q::zero(); bx.dims()];
    for (y, l) in simplex.vertices().iter().zip(lambda) {
        if l.is_zero() {
            continue;
        }
        let mut fy = f.get(y)?;
        if clamp {
            fy = bx.clamp(&fy);
        }
        for (o, c) in out.iter_mut().zip(fy.coords()) {
            *o += l * q_int(*c);
        }
    }
    Ok(out)
}

/// `f'(x) = sum_j lambda_j f(y^j)` over the simplex containing `x`. With
/// `clamp`, vertex values are first clipped into `bx`, which keeps `f'` a
/// monotone self-map of the box.
pub fn pl_eval<F: GridFn>(oracle: &mut Oracle<F>, x: &[Q], bx: &GridBox, clamp: bool) -> Result<Vec<Q>> {
    let (simplex, lambda) = locate_simplex(x, bx)?;
    interpolate(&mut CachedOracle::new(oracle), &simplex, &lambda, bx, clamp)
}

/// `f'` evaluated through a caller-chosen simplex containing `x`.
pub fn pl_eval_in<F: GridFn>(
    oracle: &mut Oracle<F>,
    simplex: &Simplex,
    x: &[Q],
    bx: &GridBox,
    clamp: bool,
) -> Result<Vec<Q>> {
    check_inside(x, bx)?;
    let lambda = barycentric_in(simplex, x)
        .ok_or_else(|| Error::MalformedInput(format!("{} is not in the given simplex", show(x))))?;
    interpolate(&mut CachedOracle::new(oracle), simplex, &lambda, bx, clamp)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlFixedPoint {
    pub x: Vec<Q>,
    pub simplex: Simplex,
    pub lambda: Vec<Q>,
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Every simplex of `bx`, ordered by base (row-major) then permutation
/// (lexicographic).
pub fn simplices(bx: &GridBox) -> impl Iterator<Item = Simplex> + '_ {
    let free = free_coords(bx);
    let mut top = bx.high.clone();
    for &i in &free {
        top[i] -= 1;
    }
    let bases = GridBox { low: bx.low.clone(), high: top };
    let bases: Vec<GridPoint> = bases.points().collect();
    bases.into_iter().flat_map(move |base| {
        let mut perm = free.clone();
        let mut first = true;
        std::iter::from_fn(move || {
            if !first && !next_permutation(&mut perm) {
                return None;
            }
            first = false;
            Some(Simplex { base: base.clone(), perm: perm.clone() })
        })
    })
}

fn pl_fixed_point_cached<F: GridFn>(f: &mut CachedOracle<'_, F>, bx: &GridBox) -> Result<PlFixedPoint> {
    let free = free_coords(bx);
    for simplex in simplices(bx) {
        let verts = simplex.vertices();
        let mut disp: Vec<Vec<i64>> = Vec::with_capacity(verts.len());
        for y in &verts {
            let gy = bx.clamp(&f.get(y)?);
            disp.push(free.iter().map(|&i| y[i] - gy[i]).collect());
        }
        // Zero must lie between the extreme displacements in every coordinate.
        let hopeless = (0..free.len()).any(|c| disp.iter().all(|v| v[c] > 0) || disp.iter().all(|v| v[c] < 0));
        if hopeless {
            continue;
        }
        let mut rows: Vec<Vec<Q>> = (0..free.len()).map(|c| disp.iter().map(|v| q_int(v[c])).collect()).collect();
        rows.push(vec![Q::one(); verts.len()]);
        let mut rhs = vec![Q::zero(); free.len()];
        rhs.push(Q::one());
        if let Some(lambda) = feasible_point(&rows, &rhs)? {
            let mut x = vec![Q::zero(); bx.dims()];
            for (y, l) in verts.iter().zip(&lambda) {
                for (o, c) in x.iter_mut().zip(y.coords()) {
                    *o += l * q_int(*c);
                }
            }
            return Ok(PlFixedPoint { x, simplex, lambda });
        }
    }
    Err(Error::MalformedInput(format!("no simplex of {bx} holds a fixed point of the clamped extension")))
}

/// A fixed point of the clamped extension `f'` on `bx`, found by scanning
/// simplices in order and solving `sum_j lambda_j (y^j - f(y^j)) = 0`,
/// `sum_j lambda_j = 1`, `lambda >= 0` exactly.
pub fn pl_fixed_point_exact<F: GridFn>(oracle: &mut Oracle<F>, bx: &GridBox) -> Result<PlFixedPoint> {
    pl_fixed_point_cached(&mut CachedOracle::new(oracle), bx)
}

/// Vertices with positive weight, with their extremes.
pub fn extract_cell(simplex: &Simplex, lambda: &[Q]) -> Cell {
    let support: Vec<GridPoint> =
        simplex.vertices().into_iter().zip(lambda).filter(|(_, l)| l.is_positive()).map(|(y, _)| y).collect();
    let v = support.first().expect("weights sum to one").clone();
    let u = support.last().expect("weights sum to one").clone();
    Cell { support, u, v }
}

fn as_integer_point(x: &[Q]) -> Option<GridPoint> {
    x.iter().map(|c| c.is_integer().then(|| c.to_integer().to_i64()).flatten()).collect::<Option<Vec<_>>>().map(GridPoint::new)
}

/// Solves Tarski through the PL extension: find a fixed point `x*` of `f'`,
/// and if it is fractional, recurse into the smaller of `L(low, v)` and
/// `L(u, high)` for the cell `v < u` around it. Returns the boxes visited.
pub fn ppad_route_solve_traced<F: GridFn>(
    oracle: &mut Oracle<F>,
    bx: &GridBox,
) -> Result<(SolveOutcome, Vec<GridBox>)> {
    let start = oracle.queries();
    let full = oracle.full_box().clone();
    let mut f = CachedOracle::new(oracle);
    let mut trace = vec![bx.clone()];
    let done = |f: &CachedOracle<'_, F>, outcome: Outcome, trace: Vec<GridBox>| {
        Ok((SolveOutcome { outcome, queries: f.oracle().queries() - start }, trace))
    };

    if *bx != full {
        let fl = f.get(&bx.low)?;
        let fh = f.get(&bx.high)?;
        if !(bx.low <= fl) || !(fh <= bx.high) {
            return Err(Error::MalformedInput(format!("f does not push the corners of {bx} inwards")));
        }
    }

    let mut cur = bx.clone();
    loop {
        let fp = pl_fixed_point_cached(&mut f, &cur)?;
        let cell = match as_integer_point(&fp.x) {
            Some(p) => Cell { support: vec![p.clone()], u: p.clone(), v: p },
            None => extract_cell(&fp.simplex, &fp.lambda),
        };
        let (a, b) = (cur.low.clone(), cur.high.clone());
        for y in &cell.support {
            let fy = f.get(y)?;
            if !(a <= fy) {
                let fa = f.get(&a)?;
                return done(&f, Outcome::Witness(MonotonicityWitness { x: a, y: y.clone(), fx: fa, fy }), trace);
            }
            if !(fy <= b) {
                let fb = f.get(&b)?;
                return done(&f, Outcome::Witness(MonotonicityWitness { x: y.clone(), y: b, fx: fy, fy: fb }), trace);
            }
        }
        if cell.u == cell.v {
            let p = cell.u;
            let fp = f.get(&p)?;
            if fp == p {
                return done(&f, Outcome::FixedPoint(p), trace);
            }
            return Err(Error::Internal(format!("{p} is fixed under clamping but f({p}) = {fp} stays inside")));
        }
        let fu = f.get(&cell.u)?;
        let fv = f.get(&cell.v)?;
        if !(cell.u <= fu) || !(fv <= cell.v) {
            for (i, y) in cell.support.iter().enumerate() {
                for z in &cell.support[i + 1..] {
                    let (fy, fz) = (f.get(y)?, f.get(z)?);
                    if let Some(w) = MonotonicityWitness::check(y, &fy, z, &fz) {
                        return done(&f, Outcome::Witness(w), trace);
                    }
                }
            }
            return Err(Error::Internal(format!("cell [{}, {}] has no violated pair", cell.v, cell.u)));
        }
        let lower = GridBox { low: a, high: cell.v };
        let upper = GridBox { low: cell.u, high: b };
        cur = if lower.num_points() <= upper.num_points() { lower } else { upper };
        trace.push(cur.clone());
    }
}

pub fn ppad_route_solve<F: GridFn>(oracle: &mut Oracle<F>, bx: &GridBox) -> Result<SolveOutcome> {
    ppad_route_solve_traced(oracle, bx).map(|(out, _)| out)
}
