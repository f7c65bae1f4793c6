//! Rounding a continuous monotone map on `[1, N]^d` to a grid function whose
//! fixed points are `eps`-approximate fixed points of the original.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::lattice::{GridPoint, GridShape};
use crate::oracle::GridFn;

/// `g(x) = round(k * f(x / k))` on `{k, .., N k}^d` with `k = ceil(1 / eps)`,
/// ties rounded up. Grid coordinate `p` stands for `x = p + k - 1`.
pub struct DiscretizedFn<C> {
    shape: GridShape,
    k: i64,
    f: C,
}

pub fn discretize_continuous<C>(f: C, n: i64, dims: usize, eps: &BigRational) -> Result<DiscretizedFn<C>>
where
    C: FnMut(&[BigRational]) -> Vec<BigRational>,
{
    if !eps.is_positive() {
        return Err(Error::MalformedInput(format!("eps = {eps} must be positive")));
    }
    let k = eps.recip().ceil().to_integer().to_i64().ok_or_else(|| Error::InvalidShape("eps too small".into()))?;
    let side = (n - 1).checked_mul(k).and_then(|s| s.checked_add(1));
    let side = side.ok_or_else(|| Error::InvalidShape("grid too large".into()))?;
    Ok(DiscretizedFn { shape: GridShape::uniform(dims, side)?, k, f })
}

impl<C> DiscretizedFn<C> {
    pub fn scale(&self) -> i64 {
        self.k
    }

    /// The continuous point `x / k` represented by grid point `p`.
    pub fn to_continuous(&self, p: &GridPoint) -> Vec<BigRational> {
        let k = BigInt::from(self.k);
        p.coords()
            .iter()
            .map(|&c| BigRational::new(BigInt::from(c + self.k - 1), k.clone()))
            .collect()
    }
}

impl<C: FnMut(&[BigRational]) -> Vec<BigRational>> GridFn for DiscretizedFn<C> {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, p: &GridPoint) -> Result<GridPoint> {
        let x = self.to_continuous(p);
        let fx = (self.f)(&x);
        if fx.len() != x.len() {
            return Err(Error::ShapeMismatch { expected: x.len(), got: fx.len() });
        }
        let k = BigRational::from_integer(BigInt::from(self.k));
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let coords = fx
            .iter()
            .map(|v| {
                let r = (v * &k + &half).floor().to_integer();
                r.to_i64().map(|x| x - self.k + 1).ok_or_else(|| Error::Internal("rounded value overflows".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GridPoint::new(coords))
    }
}
