//! Simple stochastic games and Shapley games as monotone fixed-point
//! problems.

pub mod catalog;
pub mod plan;
pub mod shapley;
pub mod ssg;

pub use plan::{PrecisionPlan, SsgPlanOptions};
pub use shapley::{
    random_shapley, shapley_solve, shapley_solve_grid_with, shapley_value_map, DiscretizedShapley, ShapleyInstance, ShapleyRoute,
    ShapleySolution, ShapleyState,
};
pub use ssg::{
    ssg_brute_force, ssg_brute_force_with_budget, ssg_discounted_map, ssg_solve_tarski, ssg_solve_tarski_with,
    ssg_value_map, DiscretizedSsg, Edge, SsgInstance, SsgSolution, Vertex, VertexKind,
};
