//! Points, shapes and boxes of the grid lattice `[n_1] x ... x [n_d]` under
//! the componentwise order. Coordinates are 1-based throughout.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the grid. Comparison is componentwise, so `PartialOrd` is the
/// lattice order and incomparable points compare as `None`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridPoint(Vec<i64>);

impl GridPoint {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn splat(dims: usize, value: i64) -> Self {
        Self(vec![value; dims])
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<i64> {
        self.0
    }

    pub fn join(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn meet(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl From<Vec<i64>> for GridPoint {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

impl<const D: usize> From<[i64; D]> for GridPoint {
    fn from(v: [i64; D]) -> Self {
        Self(v.to_vec())
    }
}

impl std::ops::Index<usize> for GridPoint {
    type Output = i64;

    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for GridPoint {
    fn index_mut(&mut self, i: usize) -> &mut i64 {
        &mut self.0[i]
    }
}

impl PartialOrd for GridPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.0.len() != other.0.len() {
            return None;
        }
        let mut ord = Ordering::Equal;
        for (a, b) in self.0.iter().zip(&other.0) {
            match (ord, a.cmp(b)) {
                (_, Ordering::Equal) => {}
                (Ordering::Equal, c) => ord = c,
                (o, c) if o == c => {}
                _ => return None,
            }
        }
        Some(ord)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn check_same(x: &GridPoint, y: &GridPoint) -> Result<()> {
    if x.dims() != y.dims() {
        return Err(Error::ShapeMismatch { expected: x.dims(), got: y.dims() });
    }
    Ok(())
}

/// Componentwise `x <= y`.
pub fn leq(x: &GridPoint, y: &GridPoint) -> Result<bool> {
    check_same(x, y)?;
    Ok(x <= y)
}

/// Returns `(join, meet)`, i.e. the componentwise max and min.
pub fn join_meet(x: &GridPoint, y: &GridPoint) -> Result<(GridPoint, GridPoint)> {
    check_same(x, y)?;
    Ok((x.join(y), x.meet(y)))
}

/// Side lengths of the grid. Non-uniform sides are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    sides: Vec<i64>,
}

impl GridShape {
    pub fn new(sides: Vec<i64>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidShape("need at least one dimension".into()));
        }
        if let Some(s) = sides.iter().find(|&&s| s < 1) {
            return Err(Error::InvalidShape(format!("side length {s} < 1")));
        }
        Ok(Self { sides })
    }

    pub fn uniform(dims: usize, side: i64) -> Result<Self> {
        Self::new(vec![side; dims])
    }

    pub fn dims(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[i64] {
        &self.sides
    }

    pub fn full_box(&self) -> GridBox {
        GridBox {
            low: GridPoint::splat(self.dims(), 1),
            high: GridPoint(self.sides.clone()),
        }
    }

    pub fn contains(&self, x: &GridPoint) -> bool {
        x.dims() == self.dims() && x.0.iter().zip(&self.sides).all(|(c, s)| (1..=*s).contains(c))
    }

    /// Row-major index of `x` (last coordinate varies fastest).
    pub fn index_of(&self, x: &GridPoint) -> usize {
        let mut idx = 0usize;
        for (c, s) in x.0.iter().zip(&self.sides) {
            idx = idx * (*s as usize) + (*c - 1) as usize;
        }
        idx
    }

    pub fn num_points(&self) -> u128 {
        self.full_box().num_points()
    }
}

/// The sublattice `L(low, high) = { x : low <= x <= high }`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridBox {
    pub low: GridPoint,
    pub high: GridPoint,
}

impl GridBox {
    pub fn new(low: GridPoint, high: GridPoint) -> Result<Self> {
        check_same(&low, &high)?;
        if !(low <= high) {
            return Err(Error::MalformedInput(format!("box corners {low} and {high} are not ordered")));
        }
        Ok(Self { low, high })
    }

    pub fn dims(&self) -> usize {
        self.low.dims()
    }

    pub fn contains(&self, x: &GridPoint) -> bool {
        x.dims() == self.dims() && self.low <= *x && *x <= self.high
    }

    pub fn side(&self, i: usize) -> i64 {
        self.high[i] - self.low[i] + 1
    }

    /// Number of integer points, saturating at `u128::MAX`.
    pub fn num_points(&self) -> u128 {
        (0..self.dims()).fold(1u128, |acc, i| acc.saturating_mul(self.side(i) as u128))
    }

    /// Componentwise clamp of `x` into the box.
    pub fn clamp(&self, x: &GridPoint) -> GridPoint {
        GridPoint(
            x.0.iter()
                .zip(self.low.0.iter().zip(&self.high.0))
                .map(|(c, (l, h))| (*c).clamp(*l, *h))
                .collect(),
        )
    }

    /// Iterates the box in row-major (lexicographic) order.
    pub fn points(&self) -> BoxPoints<'_> {
        BoxPoints { bx: self, next: Some(self.low.clone()) }
    }
}

impl fmt::Display for GridBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.low, self.high)
    }
}

pub struct BoxPoints<'a> {
    bx: &'a GridBox,
    next: Option<GridPoint>,
}

impl Iterator for BoxPoints<'_> {
    type Item = GridPoint;

    fn next(&mut self) -> Option<GridPoint> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.dims();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if succ[i] < self.bx.high[i] {
                succ[i] += 1;
                self.next = Some(succ);
                break;
            }
            succ[i] = self.bx.low[i];
        }
        Some(cur)
    }
}
