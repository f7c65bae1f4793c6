//! One-dimensional monotone functions whose least fixed point encodes
//! satisfiability of a CNF formula.
//!
//! The domain `{0, .., 2^n}` is stored shifted by one as the grid `[2^n + 1]`:
//! grid point `p` stands for the integer `p - 1`, read as an assignment with
//! variable `i` equal to bit `i - 1`.

use crate::error::{Error, Result};
use crate::lattice::{GridPoint, GridShape};
use crate::oracle::GridFn;

/// Largest variable count accepted by [`sat_lfp_instance`].
pub const MAX_SAT_VARS: u32 = 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for c in &clauses {
            if c.is_empty() {
                return Err(Error::MalformedInput("empty clause".into()));
            }
            if let Some(l) = c.iter().find(|l| **l == 0 || l.unsigned_abs() > num_vars) {
                return Err(Error::MalformedInput(format!("literal {l} out of range 1..={num_vars}")));
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let bit = assignment >> (l.unsigned_abs() - 1) & 1 == 1;
                bit == (l > 0)
            })
        })
    }

    pub fn is_satisfiable(&self) -> bool {
        (0..1u64 << self.num_vars).any(|a| self.satisfied_by(a))
    }

    /// Parses DIMACS CNF (`p cnf <vars> <clauses>` header, `c` comments,
    /// zero-terminated clauses).
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut num_vars = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<_> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[0] != "cnf" {
                    return Err(Error::Format(format!("bad DIMACS header {line:?}")));
                }
                num_vars = Some(parts[1].parse().map_err(|_| Error::Format(format!("bad variable count in {line:?}")))?);
                continue;
            }
            for tok in line.split_whitespace() {
                let lit: i32 = tok.parse().map_err(|_| Error::Format(format!("bad literal {tok:?}")))?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(lit);
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let num_vars = num_vars.ok_or_else(|| Error::Format("missing DIMACS header".into()))?;
        Self::new(num_vars, clauses)
    }
}

/// `f(x) = x` if `x` satisfies the formula, `x + 1` otherwise, and
/// `f(2^n) = 2^n`.
#[derive(Clone, Debug)]
pub struct SatLfpFn {
    shape: GridShape,
    cnf: CnfFormula,
}

impl SatLfpFn {
    /// The integer (unshifted) value represented by a grid coordinate.
    pub fn value_of(p: i64) -> u64 {
        (p - 1) as u64
    }

    pub fn top(&self) -> i64 {
        self.shape.sides()[0]
    }
}

pub fn sat_lfp_instance(cnf: &CnfFormula) -> Result<SatLfpFn> {
    if cnf.num_vars > MAX_SAT_VARS {
        return Err(Error::InvalidShape(format!("{} variables exceed the grid budget", cnf.num_vars)));
    }
    let side = (1i64 << cnf.num_vars) + 1;
    Ok(SatLfpFn { shape: GridShape::new(vec![side])?, cnf: cnf.clone() })
}

impl GridFn for SatLfpFn {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint> {
        let p = x[0];
        if p == self.top() || self.cnf.satisfied_by(Self::value_of(p)) {
            Ok(x.clone())
        } else {
            Ok(GridPoint::from([p + 1]))
        }
    }
}
