//! Exact values of two-player zero-sum matrix games. The row player
//! maximizes `x^T A y`.

use num_traits::{One, Zero};
use serde::Serialize;

use tarski_core::lp;

use crate::error::{Error, Result};
use crate::rational::{serde_q, Q};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixGameSolution {
    #[serde(with = "serde_q")]
    pub value: Q,
    #[serde(with = "serde_q::vec")]
    pub row_strategy: Vec<Q>,
    #[serde(with = "serde_q::vec")]
    pub col_strategy: Vec<Q>,
}

fn check_matrix(a: &[Vec<Q>]) -> Result<(usize, usize)> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(Error::MalformedInstance("payoff matrix must be non-empty and rectangular".into()));
    }
    Ok((m, n))
}

/// Value and optimal column strategy from `max 1.w s.t. A'w <= 1`, where
/// `A' = A - min(A) + 1` is entrywise positive. The LP duals give a row
/// strategy as a by-product.
fn column_lp(a: &[Vec<Q>]) -> Result<(Q, Vec<Q>, Vec<Q>)> {
    let (m, n) = check_matrix(a)?;
    let shift = a.iter().flatten().min().expect("non-empty").clone() - Q::one();
    let shifted: Vec<Vec<Q>> = a.iter().map(|r| r.iter().map(|v| v - &shift).collect()).collect();
    let sol = lp::maximize(&vec![Q::one(); n], &shifted, &vec![Q::one(); m])?;
    let inv = Q::one() / &sol.objective;
    let col = sol.x.iter().map(|w| w * &inv).collect();
    let row = sol.duals.iter().map(|u| u * &inv).collect();
    Ok((inv + shift, col, row))
}

/// The minimax value with optimal strategies for both players. The column
/// strategy comes from the LP on `A`, the row strategy from the independent
/// LP on `-A^T`.
pub fn matrix_game_value(a: &[Vec<Q>]) -> Result<MatrixGameSolution> {
    let (m, n) = check_matrix(a)?;
    let (value, col_strategy, _) = column_lp(a)?;
    let neg_t: Vec<Vec<Q>> = (0..n).map(|j| (0..m).map(|i| -a[i][j].clone()).collect()).collect();
    let (neg_value, row_strategy, _) = column_lp(&neg_t)?;
    if neg_value != -value.clone() {
        return Err(Error::Core(tarski_core::Error::Internal(format!(
            "row and column programs disagree: {value} vs {}",
            -neg_value
        ))));
    }
    Ok(MatrixGameSolution { value, row_strategy, col_strategy })
}

/// Only the value, from a single LP. Used on hot paths.
pub fn matrix_game_value_only(a: &[Vec<Q>]) -> Result<Q> {
    let (m, n) = check_matrix(a)?;
    if m == 1 {
        return Ok(a[0].iter().min().expect("non-empty").clone());
    }
    if n == 1 {
        return Ok(a.iter().map(|r| &r[0]).max().expect("non-empty").clone());
    }
    if let Some(v) = saddle_point(a) {
        return Ok(v);
    }
    Ok(column_lp(a)?.0)
}

fn saddle_point(a: &[Vec<Q>]) -> Option<Q> {
    let maximin = a.iter().map(|r| r.iter().min().expect("non-empty")).max()?;
    let n = a[0].len();
    let minimax = (0..n).map(|j| a.iter().map(|r| &r[j]).max().expect("non-empty")).min()?;
    (maximin == minimax).then(|| maximin.clone())
}

/// The guarantees `min_j (x^T A)_j` and `max_i (A y)_i` of a strategy pair.
pub fn guarantees(a: &[Vec<Q>], row: &[Q], col: &[Q]) -> (Q, Q) {
    let n = a[0].len();
    let row_guarantee = (0..n)
        .map(|j| row.iter().zip(a).map(|(x, r)| x * &r[j]).fold(Q::zero(), |s, v| s + v))
        .min()
        .expect("non-empty");
    let col_guarantee = a
        .iter()
        .map(|r| r.iter().zip(col).map(|(v, y)| v * y).fold(Q::zero(), |s, v| s + v))
        .max()
        .expect("non-empty");
    (row_guarantee, col_guarantee)
}
