//! Exact arithmetic in the quadratic field Q(sqrt 2).
//!
//! Elements are `a + b*sqrt(2)` with `a`, `b` arbitrary-precision rationals.
//! Every comparison is decided exactly: the sign of `a + b*sqrt(2)` reduces
//! to comparing `a^2` with `2*b^2` when the two parts disagree in sign.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ChaosError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    a: BigRational,
    b: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl QSqrt2 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        // BigRational keeps itself reduced, so equality is structural.
        Self { a, b }
    }

    pub fn from_ratios(a: (i64, i64), b: (i64, i64)) -> Self {
        Self::new(rat(a.0, a.1), rat(b.0, b.1))
    }

    pub fn rational(a: BigRational) -> Self {
        Self::new(a, BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn sqrt2() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.b
    }

    /// Rational elements are exactly those with a vanishing sqrt(2) part.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            (sa, _) => {
                // Opposite signs: compare |a| with |b|*sqrt(2) by squaring.
                let a2 = &self.a * &self.a;
                let b2 = &self.b * &self.b * BigRational::from_integer(BigInt::from(2));
                match a2.cmp(&b2) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * std::f64::consts::SQRT_2
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        let guess = self.to_f64().floor();
        let mut n = if guess.is_finite() {
            BigInt::from(guess as i64)
        } else {
            // Fall back to a bound derived from the rational parts.
            (self.a.floor() + (self.b.clone() * rat(3, 2)).floor()).to_integer()
        };
        loop {
            let q = Self::rational(BigRational::from_integer(n.clone()));
            if (self - &q).signum() == Ordering::Less {
                n -= 1;
                continue;
            }
            let q1 = Self::rational(BigRational::from_integer(n.clone() + 1));
            if (self - &q1).signum() != Ordering::Less {
                n += 1;
                continue;
            }
            return n;
        }
    }

    /// Representative of the value modulo 1, in `[0, 1)`.
    pub fn fract(&self) -> Self {
        let n = self.floor();
        self - &Self::rational(BigRational::from_integer(n))
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::new(&self.a * r, &self.b * r)
    }

    /// Parses a rational literal such as `3`, `-1/2`.
    pub fn parse_rational(s: &str) -> Result<BigRational, ChaosError> {
        let s = s.trim();
        let bad = || ChaosError::Usage(format!("invalid rational `{s}`"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        } else {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

pub(crate) fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QSqrt2 {
    /// Written as `a+br2` (for example `1/2+-1/3r2`); the rational part alone when `b = 0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", format_rational(&self.a))
        } else {
            write!(f, "{}+{}r2", format_rational(&self.a), format_rational(&self.b))
        }
    }
}

impl fmt::Debug for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for QSqrt2 {
    type Err = ChaosError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(body) = s.strip_suffix("r2") {
            match body.rsplit_once('+') {
                Some((a, b)) if !a.is_empty() && !a.ends_with(['+', '-']) => Ok(Self::new(
                    Self::parse_rational(a)?,
                    Self::parse_rational(b)?,
                )),
                _ => Ok(Self::new(BigRational::zero(), Self::parse_rational(body)?)),
            }
        } else {
            Ok(Self::rational(Self::parse_rational(s)?))
        }
    }
}

impl Serialize for QSqrt2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for QSqrt2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QSqrt2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl Add for &QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Sub for &QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl Mul for &QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, rhs: &QSqrt2) -> QSqrt2 {
        let two = BigRational::from_integer(BigInt::from(2));
        QSqrt2::new(
            &self.a * &rhs.a + &self.b * &rhs.b * two,
            &self.a * &rhs.b + &self.b * &rhs.a,
        )
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2::new(-self.a, -self.b)
    }
}

impl Add for QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: QSqrt2) -> QSqrt2 {
        &self + &rhs
    }
}

impl Sub for QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, rhs: QSqrt2) -> QSqrt2 {
        &self - &rhs
    }
}



#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: (i64, i64), b: (i64, i64)) -> QSqrt2 {
        QSqrt2::from_ratios(a, b)
    }

    #[test]
    fn sign_of_mixed_parts() {
        // 3 - 2*sqrt(2) = 0.1715... > 0
        assert_eq!(q((3, 1), (-2, 1)).signum(), Ordering::Greater);
        // 1 - sqrt(2) < 0
        assert_eq!(q((1, 1), (-1, 1)).signum(), Ordering::Less);
        // -7/5 + sqrt(2) > 0 since 49/25 < 2
        assert_eq!(q((-7, 5), (1, 1)).signum(), Ordering::Greater);
        assert_eq!(QSqrt2::zero().signum(), Ordering::Equal);
    }

    #[test]
    fn floor_and_fract() {
        assert_eq!(QSqrt2::sqrt2().floor(), BigInt::from(1));
        assert_eq!(q((-1, 2), (0, 1)).floor(), BigInt::from(-1));
        let f = q((5, 1), (1, 1)).fract();
        assert_eq!(f, q((-1, 1), (1, 1)));
        assert!(f >= QSqrt2::zero() && f < QSqrt2::from_int(1));
        assert_eq!(QSqrt2::from_int(3).fract(), QSqrt2::zero());
    }

    #[test]
    fn multiplication_uses_sqrt2_squared() {
        let s = QSqrt2::sqrt2();
        assert_eq!(&s * &s, QSqrt2::from_int(2));
    }

    #[test]
    fn parse_and_display() {
        for text in ["1/2+-1/3r2", "0", "-5/7", "1+1r2"] {
            let v: QSqrt2 = text.parse().unwrap();
            assert_eq!(v.to_string(), text);
        }
        let v: QSqrt2 = "1/4r2".parse().unwrap();
        assert_eq!(v, q((0, 1), (1, 4)));
        let v: QSqrt2 = "-1r2".parse().unwrap();
        assert_eq!(v, q((0, 1), (-1, 1)));
        assert!("1/0".parse::<QSqrt2>().is_err());
    }
}
