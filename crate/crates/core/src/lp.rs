//! Dense exact-rational simplex with Bland's anti-cycling rule.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    rows: Vec<Vec<Q>>,
    /// Reduced costs of the maximization objective, plus its current value
    /// in the last entry (negated).
    obj: Vec<Q>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let k = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &k * pv;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let k = self.obj[c].clone();
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= &k * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Runs to optimality. Returns `false` if the objective is unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            let Some(c) = (0..self.cols).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.cols] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn solution(&self, n: usize) -> Vec<Q> {
        let mut x = vec![Q::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rows[i][self.cols].clone();
            }
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Q>,
    pub objective: Q,
    /// Optimal dual multipliers of the `<=` constraints.
    pub duals: Vec<Q>,
}

/// `max c.x` subject to `A x <= b`, `x >= 0`, for `b >= 0`.
pub fn maximize(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> Result<LpSolution> {
    let (m, n) = (a.len(), c.len());
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::MalformedInput("constraint matrix has inconsistent dimensions".into()));
    }
    if b.iter().any(Signed::is_negative) {
        return Err(Error::MalformedInput("right-hand side must be non-negative".into()));
    }
    let cols = n + m;
    let rows = (0..m)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend((0..m).map(|j| if i == j { Q::from_integer(1.into()) } else { Q::zero() }));
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut obj: Vec<Q> = c.iter().map(|v| -v.clone()).collect();
    obj.extend(std::iter::repeat(Q::zero()).take(m + 1));
    let mut t = Tableau { rows, obj, basis: (n..n + m).collect(), cols };
    if !t.optimize() {
        return Err(Error::MalformedInput("linear program is unbounded".into()));
    }
    let x = t.solution(n);
    let objective = t.obj[cols].clone();
    let duals = t.obj[n..n + m].to_vec();
    Ok(LpSolution { x, objective, duals })
}

/// Some `x >= 0` with `A x = b`, or `None` if there is none (phase one of
/// the two-phase method).
pub fn feasible_point(a: &[Vec<Q>], b: &[Q]) -> Result<Option<Vec<Q>>> {
    let m = a.len();
    if b.len() != m {
        return Err(Error::MalformedInput("constraint matrix has inconsistent dimensions".into()));
    }
    let n = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::MalformedInput("ragged constraint matrix".into()));
    }
    let cols = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Q> = a[i].iter().map(|v| if flip { -v.clone() } else { v.clone() }).collect();
        row.extend((0..m).map(|j| if i == j { Q::from_integer(1.into()) } else { Q::zero() }));
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        rows.push(row);
    }
    // Maximize -sum(artificials), priced out against the artificial basis.
    let mut obj = vec![Q::zero(); cols + 1];
    for row in &rows {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[cols] -= &row[cols];
    }
    let mut t = Tableau { rows, obj, basis: (n..n + m).collect(), cols };
    t.optimize();
    if !t.obj[cols].is_zero() {
        return Ok(None);
    }
    Ok(Some(t.solution(n)))
}
