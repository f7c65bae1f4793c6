//! Exact rational helpers: parsing, `"num/den"` serialization and best
//! approximation under a denominator bound.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"a/b"`, integers, decimals (`"0.25"`) and scientific notation
/// (`"1e-6"`, `"2.5E3"`) exactly.
pub fn parse_rational(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if scale >= 0 {
        Q::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

pub fn format_rational(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn to_f64(v: &Q) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter for rationals written as `"num/den"` strings (plain
/// numbers are accepted on input).
pub mod serde_q {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_rational, parse_rational, Q};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Str(String),
        Int(i64),
        Float(f64),
    }

    fn parse_raw<E: serde::de::Error>(raw: Raw) -> Result<Q, E> {
        match raw {
            Raw::Str(s) => parse_rational(&s).map_err(E::custom),
            Raw::Int(i) => Ok(super::qi(i)),
            Raw::Float(f) => parse_rational(&f.to_string()).map_err(E::custom),
        }
    }

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        parse_raw(Raw::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.serialize_some(&format_rational(x)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
            Option::<Raw>::deserialize(d)?.map(parse_raw).transpose()
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&format_rational(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            Vec::<Raw>::deserialize(d)?.into_iter().map(parse_raw).collect()
        }
    }

    pub mod matrix {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(m: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(m.len()))?;
            for row in m {
                let row: Vec<String> = row.iter().map(format_rational).collect();
                seq.serialize_element(&row)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
            Vec::<Vec<Raw>>::deserialize(d)?
                .into_iter()
                .map(|row| row.into_iter().map(parse_raw).collect())
                .collect()
        }
    }

    pub mod tensor {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(t: &[Vec<Vec<Q>>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(t.len()))?;
            for m in t {
                let m: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(format_rational).collect()).collect();
                seq.serialize_element(&m)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Vec<Q>>>, D::Error> {
            Vec::<Vec<Vec<Raw>>>::deserialize(d)?
                .into_iter()
                .map(|m| m.into_iter().map(|row| row.into_iter().map(parse_raw).collect()).collect())
                .collect()
        }
    }
}

/// The rational with denominator at most `max_den` closest to `x`; on a
/// tie, the one with the smaller denominator.
pub fn best_rational_approx(x: &Q, max_den: &BigInt) -> Result<Q> {
    if *max_den < BigInt::one() {
        return Err(Error::Precision(format!("denominator bound {max_den} < 1")));
    }
    if x.denom() <= max_den {
        return Ok(x.clone());
    }
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    loop {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if q2 > *max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let r = &n - &a * &d;
        (n, d) = (d, r);
    }
    let k = (max_den - &q0).div_floor(&q1);
    let b1 = Q::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let b2 = Q::new(p1, q1);
    let (e1, e2) = ((&b1 - x).abs(), (&b2 - x).abs());
    Ok(match e1.cmp(&e2) {
        std::cmp::Ordering::Less => b1,
        std::cmp::Ordering::Greater => b2,
        std::cmp::Ordering::Equal => {
            if b1.denom() <= b2.denom() {
                b1
            } else {
                b2
            }
        }
    })
}
