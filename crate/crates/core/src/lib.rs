//! Fixed points of monotone functions on finite grid lattices: oracles with
//! exact query accounting, solvers, instance generators, the simplicial
//! (PL-extension) solver and an adaptive adversary for the plane.

pub mod adversary;
pub mod error;
pub mod instances;
pub mod lattice;
pub mod lp;
pub mod oracle;
pub mod simplicial;
pub mod solvers;

pub use error::{Error, Result};
pub use lattice::{join_meet, leq, GridBox, GridPoint, GridShape};
pub use oracle::{check_monotone_exhaustive, FnGrid, GridFn, MonotonicityWitness, Oracle, Query, TableFn};
pub use solvers::{
    binary_search_1d, brute_force_fix, dqy_solve, local_search_pls, value_iteration, FixSet, IterationDirection,
    Outcome, SolveOutcome, SolverKind,
};
