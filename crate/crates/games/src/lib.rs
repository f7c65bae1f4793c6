//! Games whose equilibria or values are Tarski fixed points: supermodular
//! games, simple stochastic games and Shapley games.

pub mod error;
pub mod matrix;
pub mod rational;
pub mod stochastic;
pub mod supermodular;

pub use error::{Error, Result};
pub use rational::{best_rational_approx, parse_rational, Q};
pub use supermodular::{
    best_response, beta_bar_oracle, check_c2_c3, diamond_search, game_from_monotone, game_from_monotone_multi,
    pure_equilibria, solve_equilibrium, BestResponseKind, PropertyViolation, SupermodularGame,
};
