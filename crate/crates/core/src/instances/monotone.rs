//! Generic random and exhaustive families of monotone grid functions, used
//! as test and benchmark workloads.

use rand::Rng;

use crate::error::Result;
use crate::lattice::{GridPoint, GridShape};
use crate::instances::random::random_staircase_herringbone;
use crate::oracle::{GridFn, TableFn};

/// `f(x) = base v join { c_i : a_i <= x }`.
#[derive(Clone, Debug)]
pub struct RandomJoinFn {
    shape: GridShape,
    base: GridPoint,
    generators: Vec<(GridPoint, GridPoint)>,
}

impl RandomJoinFn {
    pub fn new(shape: GridShape, base: GridPoint, generators: Vec<(GridPoint, GridPoint)>) -> Self {
        Self { shape, base, generators }
    }
}

fn random_point<R: Rng>(shape: &GridShape, rng: &mut R) -> GridPoint {
    GridPoint::new(shape.sides().iter().map(|&s| rng.gen_range(1..=s)).collect())
}

pub fn random_join<R: Rng>(shape: &GridShape, count: usize, rng: &mut R) -> RandomJoinFn {
    let bottom = GridPoint::splat(shape.dims(), 1);
    let base = if rng.gen_bool(0.5) { bottom } else { random_point(shape, rng) };
    let generators = (0..count).map(|_| (random_point(shape, rng), random_point(shape, rng))).collect();
    RandomJoinFn::new(shape.clone(), base, generators)
}

impl GridFn for RandomJoinFn {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint> {
        let mut y = self.base.clone();
        for (a, c) in &self.generators {
            if a <= x {
                y = y.join(c);
            }
        }
        Ok(y)
    }
}

/// `f_j(x) = clamp(c_j + floor(sum_i w_ji (x_i - 1) / s_j), 1, n_j)` with
/// non-negative weights.
#[derive(Clone, Debug)]
pub struct LinearThresholdFn {
    shape: GridShape,
    weights: Vec<Vec<i64>>,
    offsets: Vec<i64>,
    scales: Vec<i64>,
}

pub fn random_linear_threshold<R: Rng>(shape: &GridShape, rng: &mut R) -> LinearThresholdFn {
    let d = shape.dims();
    let mut weights = Vec::with_capacity(d);
    let mut offsets = Vec::with_capacity(d);
    let mut scales = Vec::with_capacity(d);
    for &side in shape.sides() {
        weights.push((0..d).map(|_| rng.gen_range(0..=3)).collect());
        offsets.push(rng.gen_range(1 - side..=side));
        scales.push(rng.gen_range(1..=d as i64 + 1));
    }
    LinearThresholdFn { shape: shape.clone(), weights, offsets, scales }
}

impl GridFn for LinearThresholdFn {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint> {
        let coords = (0..x.dims())
            .map(|j| {
                let s: i64 = self.weights[j].iter().zip(x.coords()).map(|(w, c)| w * (c - 1)).sum();
                (self.offsets[j] + s.div_euclid(self.scales[j])).clamp(1, self.shape.sides()[j])
            })
            .collect();
        Ok(GridPoint::new(coords))
    }
}

/// A random monotone value table built in row-major order: each entry is
/// drawn at or above the join of its lower neighbours.
pub fn random_monotone_table<R: Rng>(shape: &GridShape, rng: &mut R) -> TableFn {
    let bx = shape.full_box();
    let mut table: Vec<GridPoint> = Vec::with_capacity(shape.num_points() as usize);
    for x in bx.points() {
        let mut lb = GridPoint::splat(shape.dims(), 1);
        for i in 0..x.dims() {
            if x[i] > 1 {
                let mut y = x.clone();
                y[i] -= 1;
                lb = lb.join(&table[shape.index_of(&y)]);
            }
        }
        let v = lb
            .coords()
            .iter()
            .zip(shape.sides())
            .map(|(&l, &s)| if rng.gen_bool(0.5) { l } else { rng.gen_range(l..=s) })
            .collect();
        table.push(GridPoint::new(v));
    }
    TableFn::new(shape.clone(), table).expect("values stay in the grid")
}

/// All monotone maps from `shape` to the chain `[range]`, as row-major
/// value tables.
pub fn monotone_component_tables(shape: &GridShape, range: i64) -> Vec<Vec<i64>> {
    let points: Vec<GridPoint> = shape.full_box().points().collect();
    let covers: Vec<Vec<usize>> = points
        .iter()
        .map(|x| {
            (0..x.dims())
                .filter(|&i| x[i] > 1)
                .map(|i| {
                    let mut y = x.clone();
                    y[i] -= 1;
                    shape.index_of(&y)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(points.len());
    fn fill(idx: usize, covers: &[Vec<usize>], range: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if idx == covers.len() {
            out.push(cur.clone());
            return;
        }
        let lb = covers[idx].iter().map(|&j| cur[j]).max().unwrap_or(1);
        for v in lb..=range {
            cur.push(v);
            fill(idx + 1, covers, range, cur, out);
            cur.pop();
        }
    }
    fill(0, &covers, range, &mut cur, &mut out);
    out
}

/// Every monotone self-map of a uniform grid `[n]^d`: the product of the
/// monotone component maps. There are `c^d` of them, where `c` counts the
/// monotone maps `[n]^d -> [n]`.
pub fn exhaustive_monotone_catalog(shape: &GridShape) -> impl Iterator<Item = TableFn> + '_ {
    let d = shape.dims();
    let range = *shape.sides().iter().max().expect("non-empty");
    let comps = monotone_component_tables(shape, range);
    let c = comps.len();
    let total = c.pow(d as u32);
    (0..total).map(move |mut code| {
        let mut choice = Vec::with_capacity(d);
        for _ in 0..d {
            choice.push(code % c);
            code /= c;
        }
        let table = (0..comps[0].len())
            .map(|p| GridPoint::new(choice.iter().enumerate().map(|(j, &ci)| comps[ci][p].min(shape.sides()[j])).collect()))
            .collect();
        TableFn::new(shape.clone(), table).expect("values stay in the grid")
    })
}

/// Cycles through the generator families by `index`: value tables, random
/// joins, linear thresholds and, on square 2-D grids, herringbones.
pub fn random_monotone_mixed<R: Rng>(shape: &GridShape, index: usize, rng: &mut R) -> TableFn {
    let square = shape.dims() == 2 && shape.sides()[0] == shape.sides()[1];
    let families = if square { 4 } else { 3 };
    let mut f: Box<dyn GridFn> = match index % families {
        0 => Box::new(random_monotone_table(shape, rng)),
        1 => {
            let count = rng.gen_range(1..=4);
            Box::new(random_join(shape, count, rng))
        }
        2 => Box::new(random_linear_threshold(shape, rng)),
        _ => {
            let h = random_staircase_herringbone(shape.sides()[0], rng.gen()).expect("side is positive");
            Box::new(h.oracle().expect("generated paths are valid"))
        }
    };
    TableFn::from_fn(&mut f).expect("generators stay in the grid")
}
