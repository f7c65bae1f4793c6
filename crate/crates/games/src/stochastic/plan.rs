//! Explicit precision parameters for turning a game into a grid instance.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::shapley::ShapleyInstance;
use super::ssg::SsgInstance;
use crate::error::{Error, Result};
use crate::rational::{serde_q, Q};

/// `eps` is the target accuracy. For SSGs, `beta` is the discount, the grid
/// is `{0..grid_side}` per vertex and values are rounded to denominators at
/// most `denominator_bound`. For Shapley games, `grid_side` is the
/// resolution `M'` and the grid is `{-K..K}` with `K = offset - 1`. A value
/// `u` sits at grid coordinate `u + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPlan {
    #[serde(with = "serde_q")]
    pub eps: Q,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_q::option")]
    pub beta: Option<Q>,
    pub grid_side: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator_bound: Option<u64>,
    pub offset: i64,
}

/// Optional overrides of the derived SSG plan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SsgPlanOptions {
    pub eps: Option<Q>,
    pub beta: Option<Q>,
    pub grid_side: Option<i64>,
    pub denominator_bound: Option<u64>,
}

const MAX_EXPONENT: u64 = 62;

fn ceil_log2(x: &Q) -> u64 {
    // Smallest k >= 0 with 2^k >= x.
    let mut k = 0u64;
    let mut p = Q::one();
    while &p < x {
        p *= Q::from_integer(BigInt::from(2));
        k += 1;
    }
    k
}

fn pow2(k: u64) -> Q {
    Q::from_integer(BigInt::one() << k)
}

impl PrecisionPlan {
    pub fn ssg(beta: Q, grid_side: i64, denominator_bound: u64, eps: Q) -> Result<Self> {
        let plan = Self { eps, beta: Some(beta), grid_side, denominator_bound: Some(denominator_bound), offset: 1 };
        plan.validate()?;
        Ok(plan)
    }

    /// The derived plan for an SSG with `n` non-sink vertices whose
    /// probabilities share the denominator `L`:
    ///
    /// * `D = (2L)^n` bounds the denominators of the values (Hadamard bound
    ///   on the absorbing system scaled by `L`);
    /// * `eps = 1/(4 D^2)`, below half the gap between distinct fractions
    ///   with denominators at most `D`;
    /// * `T = n L^n` bounds expected absorption times, `t = ceil(log2 T) + 1`;
    /// * `beta = 2^-k` and `M = 2^k` with `k = ceil(log2(1/eps)) + t + 1`.
    pub fn for_ssg(inst: &SsgInstance, opts: &SsgPlanOptions) -> Result<Self> {
        let n = inst.inner_vertices().len() as u32;
        let l = inst.probability_denominator();
        let d = match opts.denominator_bound {
            Some(d) => d,
            None => (BigInt::from(2) * &l)
                .pow(n)
                .to_u64()
                .ok_or_else(|| Error::Precision(format!("denominator bound (2*{l})^{n} exceeds 64 bits")))?,
        };
        let eps = match &opts.eps {
            Some(e) => e.clone(),
            None => Q::new(BigInt::one(), BigInt::from(4) * BigInt::from(d) * BigInt::from(d)),
        };
        if !eps.is_positive() {
            return Err(Error::Precision("eps must be positive".into()));
        }
        let horizon = Q::from_integer(BigInt::from(n.max(1)) * l.pow(n));
        let t = ceil_log2(&horizon) + 1;
        let k = ceil_log2(&(Q::one() / &eps)) + t + 1;
        let beta = match &opts.beta {
            Some(b) => b.clone(),
            None => Q::one() / pow2(k.min(MAX_EXPONENT)),
        };
        let grid_side = match opts.grid_side {
            Some(m) => m,
            None => {
                if k > MAX_EXPONENT {
                    return Err(Error::Precision(format!("derived grid 2^{k} does not fit 64-bit coordinates")));
                }
                1i64 << k
            }
        };
        Self::ssg(beta, grid_side, d, eps)
    }

    /// `M' = ceil(4 max(M, 1) / (eps q))` and `K = ceil(M' M / q)`, so that
    /// `{-K..K} / M'` covers the value range `[-M/q, M/q]`.
    pub fn for_shapley(inst: &ShapleyInstance, eps: &Q) -> Result<Self> {
        if !eps.is_positive() {
            return Err(Error::Precision("eps must be positive".into()));
        }
        let m = inst.reward_bound();
        let q = inst.halting_probability();
        let m1 = if m > Q::one() { m.clone() } else { Q::one() };
        let res = (Q::from_integer(BigInt::from(4)) * m1 / (eps * &q)).ceil().to_integer();
        let k = (Q::from_integer(res.clone()) * &m / &q).ceil().to_integer();
        let too_big = || Error::Precision(format!("grid of resolution {res} over [-M/q, M/q] does not fit 64-bit coordinates"));
        let grid_side = res.to_i64().ok_or_else(too_big)?;
        let half = k.to_i64().filter(|&k| k < i64::MAX / 2 - 1).ok_or_else(too_big)?;
        let plan = Self { eps: eps.clone(), beta: None, grid_side, denominator_bound: None, offset: half + 1 };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eps.is_positive() {
            return Err(Error::Precision(format!("eps = {} must be positive", self.eps)));
        }
        if let Some(b) = &self.beta {
            if !b.is_positive() || *b >= Q::one() {
                return Err(Error::Precision(format!("beta = {b} must lie strictly between 0 and 1")));
            }
        }
        if self.grid_side < 2 {
            return Err(Error::Precision(format!("grid side {} < 2", self.grid_side)));
        }
        if self.denominator_bound == Some(0) {
            return Err(Error::Precision("denominator bound must be at least 1".into()));
        }
        if self.offset < 1 {
            return Err(Error::Precision("grid offset must be at least 1".into()));
        }
        Ok(())
    }
}

/// Rounds `x` to the nearest multiple of `2^-bits` (halves round up).
pub(crate) fn round_dyadic(x: &Q, bits: u64) -> Q {
    let scale = BigInt::one() << bits;
    let scaled = x * Q::from_integer(scale.clone()) + Q::new(BigInt::one(), BigInt::from(2));
    Q::new(scaled.numer().div_floor(scaled.denom()), scale)
}
