//! Values in `Q≥0 ∪ {∞}` with exact rational arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

/// Builds the rational `n / d`.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        Some(BigRational::from_integer(s.parse().ok()?))
    }
}

/// An element of the value domain: a nonnegative rational or infinity.
///
/// The derived order places every finite value below `Inf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtValue {
    Fin(Rational),
    Inf,
}

impl ExtValue {
    pub fn zero() -> Self {
        ExtValue::Fin(Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        ExtValue::Fin(int(n))
    }

    /// Returns `None` for negative inputs, which are outside the domain.
    pub fn finite(r: Rational) -> Option<Self> {
        if r.is_negative() {
            None
        } else {
            Some(ExtValue::Fin(r))
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ExtValue::Inf)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtValue::Fin(r) => Some(r),
            ExtValue::Inf => None,
        }
    }

    /// Scales by a positive rational. `c` must be strictly positive.
    pub fn scale(&self, c: &Rational) -> Self {
        debug_assert!(c.is_positive());
        match self {
            ExtValue::Fin(r) => ExtValue::Fin(r * c),
            ExtValue::Inf => ExtValue::Inf,
        }
    }
}

/// Total order on extended values.
pub fn ext_compare(a: &ExtValue, b: &ExtValue) -> Ordering {
    a.cmp(b)
}

/// Addition with `∞` absorbing.
pub fn ext_add(a: &ExtValue, b: &ExtValue) -> ExtValue {
    match (a, b) {
        (ExtValue::Fin(x), ExtValue::Fin(y)) => ExtValue::Fin(x + y),
        _ => ExtValue::Inf,
    }
}

impl Add for ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: ExtValue) -> ExtValue {
        ext_add(&self, &rhs)
    }
}

impl<'a> Add<&'a ExtValue> for &'a ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: &ExtValue) -> ExtValue {
        ext_add(self, rhs)
    }
}

impl AddAssign<&ExtValue> for ExtValue {
    fn add_assign(&mut self, rhs: &ExtValue) {
        *self = ext_add(self, rhs);
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Fin(r) => f.write_str(&fmt_rational(r)),
            ExtValue::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid extended value `{0}`")]
pub struct ExtParseError(pub String);

impl FromStr for ExtValue {
    type Err = ExtParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "inf" || t == "∞" {
            return Ok(ExtValue::Inf);
        }
        parse_rational(t)
            .and_then(ExtValue::finite)
            .ok_or_else(|| ExtParseError(s.to_string()))
    }
}

impl Serialize for ExtValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<ExtValue> {
        let mut v: Vec<ExtValue> = [(0, 1), (1, 3), (1, 2), (1, 1), (5, 6), (2, 1), (7, 3)]
            .iter()
            .map(|&(n, d)| ExtValue::Fin(rat(n, d)))
            .collect();
        v.push(ExtValue::Inf);
        v
    }

    #[test]
    fn absorption_and_exact_sums() {
        assert_eq!(ext_add(&ExtValue::Inf, &ExtValue::from_int(1)), ExtValue::Inf);
        assert_eq!(ext_compare(&ExtValue::Inf, &ExtValue::Inf), Ordering::Equal);
        assert!(ExtValue::Inf >= ExtValue::Inf + ExtValue::Inf);
        assert_eq!(
            ext_add(&ExtValue::Fin(rat(1, 2)), &ExtValue::Fin(rat(1, 3))),
            ExtValue::Fin(rat(5, 6))
        );
    }

    #[test]
    fn addition_laws_on_grid() {
        let g = grid();
        for a in &g {
            for b in &g {
                assert_eq!(a + b, b + a);
                for c in &g {
                    assert_eq!(&(a + b) + c, a + &(b + c));
                }
            }
        }
    }

    #[test]
    fn order_is_total_with_inf_maximal() {
        let g = grid();
        for a in &g {
            assert!(a <= &ExtValue::Inf);
            for b in &g {
                let ab = ext_compare(a, b);
                assert_eq!(ab.reverse(), ext_compare(b, a));
                for c in &g {
                    if a <= b && b <= c {
                        assert!(a <= c);
                    }
                }
            }
        }
    }

    #[test]
    fn parse_and_display() {
        for s in ["0", "3", "5/6", "inf"] {
            assert_eq!(s.parse::<ExtValue>().unwrap().to_string(), s);
        }
        assert!("-1".parse::<ExtValue>().is_err());
        assert_eq!("∞".parse::<ExtValue>().unwrap(), ExtValue::Inf);
    }
}
