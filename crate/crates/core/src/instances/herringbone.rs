//! Two-dimensional herringbone functions: a monotone main path through a
//! unique fixed point, with every other point pushed diagonally towards it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GridPoint, GridShape};
use crate::oracle::GridFn;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HerringboneInstance {
    #[serde(rename = "N")]
    pub n: i64,
    pub path: Vec<[i64; 2]>,
    pub fixed_point: [i64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl HerringboneInstance {
    pub fn new(n: i64, path: Vec<[i64; 2]>, fixed_point: [i64; 2]) -> Result<Self> {
        let inst = Self { n, path, fixed_point, seed: None };
        inst.validate()?;
        Ok(inst)
    }

    /// The 5x5 example: path (1,1),(1,2),(2,2),(2,3),(2,4),(3,4),(4,4),(5,4),(5,5)
    /// with fixed point (2,2).
    pub fn figure_one() -> Self {
        let path = vec![[1, 1], [1, 2], [2, 2], [2, 3], [2, 4], [3, 4], [4, 4], [5, 4], [5, 5]];
        Self { n: 5, path, fixed_point: [2, 2], seed: None }
    }

    /// Path E,N,E,N,... from `(1,1)` to `(n,n)`.
    pub fn staircase(n: i64, fixed_point: [i64; 2]) -> Result<Self> {
        let mut path = vec![[1, 1]];
        let [mut x, mut y] = [1, 1];
        while x < n || y < n {
            if x <= y && x < n {
                x += 1;
            } else {
                y += 1;
            }
            path.push([x, y]);
        }
        Self::new(n, path, fixed_point)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 1 {
            return Err(Error::InvalidShape(format!("side {n} < 1")));
        }
        if self.path.len() as i64 != 2 * n - 1 {
            return Err(Error::MalformedInput(format!("path has {} points, expected {}", self.path.len(), 2 * n - 1)));
        }
        if self.path[0] != [1, 1] || *self.path.last().expect("non-empty") != [n, n] {
            return Err(Error::MalformedInput("path must run from (1,1) to (N,N)".into()));
        }
        for w in self.path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let step = (b[0] - a[0], b[1] - a[1]);
            if step != (1, 0) && step != (0, 1) {
                return Err(Error::MalformedInput(format!("path step {a:?} -> {b:?} is not a unit step")));
            }
        }
        if !self.path.contains(&self.fixed_point) {
            return Err(Error::MalformedInput(format!("fixed point {:?} is not on the path", self.fixed_point)));
        }
        Ok(())
    }

    pub fn oracle(&self) -> Result<HerringboneFn> {
        self.validate()?;
        let fixed_index = (self.fixed_point[0] + self.fixed_point[1] - 2) as usize;
        Ok(HerringboneFn {
            shape: GridShape::uniform(2, self.n)?,
            path: self.path.clone(),
            fixed_index,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("instance serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let inst: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        inst.validate()?;
        Ok(inst)
    }
}

/// The induced function. Path points are indexed by their anti-diagonal
/// `x + y`, so membership is a single lookup.
#[derive(Clone, Debug)]
pub struct HerringboneFn {
    shape: GridShape,
    path: Vec<[i64; 2]>,
    fixed_index: usize,
}

impl HerringboneFn {
    pub fn path_point(&self, diagonal: i64) -> [i64; 2] {
        self.path[(diagonal - 2) as usize]
    }

    pub fn fixed_point(&self) -> GridPoint {
        GridPoint::from(self.path[self.fixed_index])
    }

    pub fn apply(&self, x: i64, y: i64) -> [i64; 2] {
        let idx = (x + y - 2) as usize;
        let p = self.path[idx];
        if p == [x, y] {
            match idx.cmp(&self.fixed_index) {
                std::cmp::Ordering::Less => self.path[idx + 1],
                std::cmp::Ordering::Greater => self.path[idx - 1],
                std::cmp::Ordering::Equal => p,
            }
        } else if x > p[0] {
            [x - 1, y + 1]
        } else {
            [x + 1, y - 1]
        }
    }
}

impl GridFn for HerringboneFn {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint> {
        Ok(GridPoint::from(self.apply(x[0], x[1])))
    }
}
