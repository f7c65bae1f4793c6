//! Black-box access to a function on the grid, with exact query accounting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GridBox, GridPoint, GridShape};

/// A function from a grid to itself. Monotonicity is a promise of the caller,
/// never checked here.
pub trait GridFn {
    fn shape(&self) -> &GridShape;

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint>;
}

impl<F: GridFn + ?Sized> GridFn for Box<F> {
    fn shape(&self) -> &GridShape {
        (**self).shape()
    }

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint> {
        (**self).eval(x)
    }
}

impl<F: GridFn + ?Sized> GridFn for &mut F {
    fn shape(&self) -> &GridShape {
        (**self).shape()
    }

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint> {
        (**self).eval(x)
    }
}

/// Adapts a closure into a [`GridFn`].
pub struct FnGrid<C> {
    shape: GridShape,
    f: C,
}

impl<C: FnMut(&GridPoint) -> GridPoint> FnGrid<C> {
    pub fn new(shape: GridShape, f: C) -> Self {
        Self { shape, f }
    }
}

impl<C: FnMut(&GridPoint) -> GridPoint> GridFn for FnGrid<C> {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint> {
        Ok((self.f)(x))
    }
}

pub fn identity(shape: GridShape) -> FnGrid<impl FnMut(&GridPoint) -> GridPoint> {
    FnGrid::new(shape, |x: &GridPoint| x.clone())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub x: GridPoint,
    pub fx: GridPoint,
}

/// Wraps a [`GridFn`] with a query counter, domain validation of every
/// answer, and an opt-in transcript.
pub struct Oracle<F> {
    func: F,
    full: GridBox,
    queries: u64,
    transcript: Option<Vec<Query>>,
}

impl<F: GridFn> Oracle<F> {
    pub fn new(func: F) -> Self {
        let full = func.shape().full_box();
        Self { func, full, queries: 0, transcript: None }
    }

    pub fn recording(mut self) -> Self {
        self.transcript = Some(Vec::new());
        self
    }

    pub fn shape(&self) -> &GridShape {
        self.func.shape()
    }

    pub fn full_box(&self) -> &GridBox {
        &self.full
    }

    pub fn dims(&self) -> usize {
        self.full.dims()
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn transcript(&self) -> Option<&[Query]> {
        self.transcript.as_deref()
    }

    pub fn inner(&self) -> &F {
        &self.func
    }

    pub fn inner_mut(&mut self) -> &mut F {
        &mut self.func
    }

    pub fn into_inner(self) -> F {
        self.func
    }

    pub fn query(&mut self, x: &GridPoint) -> Result<GridPoint> {
        if x.dims() != self.full.dims() {
            return Err(Error::ShapeMismatch { expected: self.full.dims(), got: x.dims() });
        }
        if !self.full.contains(x) {
            return Err(Error::OutOfBox { point: x.clone() });
        }
        self.queries += 1;
        let fx = self.func.eval(x)?;
        if !self.full.contains(&fx) {
            return Err(Error::MalformedOracle { query: x.clone(), answer: fx });
        }
        if let Some(t) = self.transcript.as_mut() {
            t.push(Query { x: x.clone(), fx: fx.clone() });
        }
        Ok(fx)
    }
}

/// A pair `x <= y` with `f(x) !<= f(y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityWitness {
    pub x: GridPoint,
    pub y: GridPoint,
    pub fx: GridPoint,
    pub fy: GridPoint,
}

impl MonotonicityWitness {
    /// Builds a witness if the pair actually violates monotonicity.
    pub fn check(x: &GridPoint, fx: &GridPoint, y: &GridPoint, fy: &GridPoint) -> Option<Self> {
        if x <= y && !(fx <= fy) {
            Some(Self { x: x.clone(), y: y.clone(), fx: fx.clone(), fy: fy.clone() })
        } else if y <= x && !(fy <= fx) {
            Some(Self { x: y.clone(), y: x.clone(), fx: fy.clone(), fy: fx.clone() })
        } else {
            None
        }
    }

    /// Re-queries both points and confirms the violation.
    pub fn verify<F: GridFn>(&self, oracle: &mut Oracle<F>) -> Result<bool> {
        let fx = oracle.query(&self.x)?;
        let fy = oracle.query(&self.y)?;
        Ok(self.x <= self.y && fx == self.fx && fy == self.fy && !(fx <= fy))
    }
}

/// Exhaustively checks monotonicity of `f` on `bx`. It suffices to compare
/// every point with its upper covers `x + e_i`.
pub fn check_monotone_exhaustive<F: GridFn>(
    oracle: &mut Oracle<F>,
    bx: &GridBox,
) -> Result<Option<MonotonicityWitness>> {
    let values = tabulate(oracle, bx)?;
    let local = GridShape::new((0..bx.dims()).map(|i| bx.side(i)).collect())?;
    let offset = |x: &GridPoint| -> usize {
        let shifted: Vec<i64> = x.coords().iter().zip(bx.low.coords()).map(|(c, l)| c - l + 1).collect();
        local.index_of(&GridPoint::new(shifted))
    };
    for x in bx.points() {
        let fx = &values[offset(&x)];
        for i in 0..x.dims() {
            if x[i] < bx.high[i] {
                let mut y = x.clone();
                y[i] += 1;
                let fy = &values[offset(&y)];
                if !(fx <= fy) {
                    return Ok(Some(MonotonicityWitness { x, y, fx: fx.clone(), fy: fy.clone() }));
                }
            }
        }
    }
    Ok(None)
}

/// Evaluates `f` on every point of `bx`, in row-major order.
pub fn tabulate<F: GridFn>(oracle: &mut Oracle<F>, bx: &GridBox) -> Result<Vec<GridPoint>> {
    bx.points().map(|x| oracle.query(&x)).collect()
}

/// Exhaustive value table; the backing store of the `table-oracle` format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFn {
    shape: GridShape,
    table: Vec<GridPoint>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    dims: usize,
    sides: Vec<i64>,
    table: Vec<Vec<i64>>,
}

impl TableFn {
    pub fn new(shape: GridShape, table: Vec<GridPoint>) -> Result<Self> {
        let n = shape.num_points();
        if table.len() as u128 != n {
            return Err(Error::Format(format!("table has {} entries, shape needs {n}", table.len())));
        }
        if let Some(bad) = table.iter().find(|v| !shape.contains(v)) {
            return Err(Error::Format(format!("table value {bad} lies outside the grid")));
        }
        Ok(Self { shape, table })
    }

    pub fn from_fn<F: GridFn>(f: &mut F) -> Result<Self> {
        let shape = f.shape().clone();
        let table = shape.full_box().points().map(|x| f.eval(&x)).collect::<Result<Vec<_>>>()?;
        Self::new(shape, table)
    }

    pub fn table(&self) -> &[GridPoint] {
        &self.table
    }

    pub fn get(&self, x: &GridPoint) -> &GridPoint {
        &self.table[self.shape.index_of(x)]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = TableFile {
            dims: self.shape.dims(),
            sides: self.shape.sides().to_vec(),
            table: self.table.iter().map(|p| p.coords().to_vec()).collect(),
        };
        serde_json::to_value(file).expect("table serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let file: TableFile = serde_json::from_value(value)?;
        if file.dims != file.sides.len() {
            return Err(Error::Format(format!("dims {} but {} sides", file.dims, file.sides.len())));
        }
        let shape = GridShape::new(file.sides)?;
        let table = file
            .table
            .into_iter()
            .map(|v| {
                if v.len() != shape.dims() {
                    Err(Error::Format(format!("table entry {v:?} has wrong arity")))
                } else {
                    Ok(GridPoint::new(v))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shape, table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(serde_json::from_str(&text)?)
    }
}

impl GridFn for TableFn {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint> {
        Ok(self.get(x).clone())
    }
}
