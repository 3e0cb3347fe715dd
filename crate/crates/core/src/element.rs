//! Elements of the acting semigroups.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ChaosError, Result};
use crate::qsqrt2::QSqrt2;

/// Determinant tolerance accepted before renormalization.
pub const DET_TOLERANCE: f64 = 1e-12;

/// A matrix of `SL(2, R)`, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    /// Builds a matrix, rescaling by `1/sqrt(det)` when the determinant is
    /// positive but not exactly 1.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Mat2> {
        let det = a * d - b * c;
        if !det.is_finite() || det <= 0.0 {
            return Err(ChaosError::usage(format!(
                "matrix [[{a},{b}],[{c},{d}]] has determinant {det}, not in SL(2,R)"
            )));
        }
        if (det - 1.0).abs() <= DET_TOLERANCE {
            return Ok(Mat2 { a, b, c, d });
        }
        let s = det.sqrt();
        Ok(Mat2 {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let m = Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        };
        Mat2::new(m.a, m.b, m.c, m.d).unwrap_or(m)
    }

    pub fn inverse(&self) -> Mat2 {
        Mat2 {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Largest absolute entry; the compact exhaustion of `SL(2,R)` uses balls of this norm.
    pub fn sup_norm(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// `[[1/n, 0], [1, n]]`, contracting every finite point towards 0.
    pub fn contracting(n: f64) -> Mat2 {
        Mat2 {
            a: 1.0 / n,
            b: 0.0,
            c: 1.0,
            d: n,
        }
    }

    /// `[[n, 0], [1, 1/n]]`, fixing 0 and pushing 1 towards `∞`.
    pub fn separating(n: f64) -> Mat2 {
        Mat2 {
            a: n,
            b: 0.0,
            c: 1.0,
            d: 1.0 / n,
        }
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementKind {
    RealTime,
    IntTime,
    Mat2,
    CircleExact,
}

impl ElementKind {
    pub fn is_abelian(self) -> bool {
        !matches!(self, ElementKind::Mat2)
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::RealTime => "real_time",
            ElementKind::IntTime => "int_time",
            ElementKind::Mat2 => "mat2",
            ElementKind::CircleExact => "circle_exact",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GroupElement {
    RealTime(f64),
    IntTime(i64),
    Mat2(Mat2),
    /// `a + b√2 (mod 1)`, reduced into `[0, 1)`.
    CircleExact(QSqrt2),
    /// Shared element acting diagonally on a product.
    TupleTime(Box<GroupElement>),
}

impl GroupElement {
    pub fn circle(v: QSqrt2) -> GroupElement {
        GroupElement::CircleExact(v.fract())
    }

    /// Strips product wrappers.
    pub fn base(&self) -> &GroupElement {
        match self {
            GroupElement::TupleTime(inner) => inner.base(),
            other => other,
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self.base() {
            GroupElement::RealTime(_) => ElementKind::RealTime,
            GroupElement::IntTime(_) => ElementKind::IntTime,
            GroupElement::Mat2(_) => ElementKind::Mat2,
            GroupElement::CircleExact(_) => ElementKind::CircleExact,
            GroupElement::TupleTime(_) => unreachable!("base strips wrappers"),
        }
    }

    pub fn identity(kind: ElementKind) -> GroupElement {
        match kind {
            ElementKind::RealTime => GroupElement::RealTime(0.0),
            ElementKind::IntTime => GroupElement::IntTime(0),
            ElementKind::Mat2 => GroupElement::Mat2(Mat2::IDENTITY),
            ElementKind::CircleExact => GroupElement::CircleExact(QSqrt2::zero()),
        }
    }

    /// The product `s·t` (acting as `t` first, then `s`).
    pub fn compose(&self, t: &GroupElement) -> Result<GroupElement> {
        match (self.base(), t.base()) {
            (GroupElement::RealTime(a), GroupElement::RealTime(b)) => {
                Ok(GroupElement::RealTime(a + b))
            }
            (GroupElement::IntTime(a), GroupElement::IntTime(b)) => a
                .checked_add(*b)
                .map(GroupElement::IntTime)
                .ok_or_else(|| ChaosError::usage("integer time overflow")),
            (GroupElement::Mat2(a), GroupElement::Mat2(b)) => Ok(GroupElement::Mat2(a.mul(b))),
            (GroupElement::CircleExact(a), GroupElement::CircleExact(b)) => {
                Ok(GroupElement::circle(a + b))
            }
            (s, t) => Err(ChaosError::usage(format!(
                "cannot compose elements of kinds {} and {}",
                s.kind().name(),
                t.kind().name()
            ))),
        }
    }

    /// Scalar time for the abelian line-like kinds.
    pub fn as_time(&self) -> Option<f64> {
        match self.base() {
            GroupElement::RealTime(t) => Some(*t),
            GroupElement::IntTime(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn parse(kind: ElementKind, s: &str) -> Result<GroupElement> {
        let bad = || ChaosError::usage(format!("invalid {} element `{s}`", kind.name()));
        let t = s.trim();
        match kind {
            ElementKind::RealTime => t.parse().map(GroupElement::RealTime).map_err(|_| bad()),
            ElementKind::IntTime => t.parse().map(GroupElement::IntTime).map_err(|_| bad()),
            ElementKind::CircleExact => Ok(GroupElement::circle(t.parse()?)),
            ElementKind::Mat2 => {
                let v: Vec<f64> = t
                    .trim_matches(|c| c == '[' || c == ']')
                    .split(|c| c == ',' || c == ';')
                    .map(|x| x.trim().trim_matches(|c| c == '[' || c == ']').parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad())?;
                if v.len() != 4 {
                    return Err(bad());
                }
                Mat2::new(v[0], v[1], v[2], v[3]).map(GroupElement::Mat2)
            }
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::RealTime(t) => write!(f, "{t}"),
            GroupElement::IntTime(n) => write!(f, "{n}"),
            GroupElement::Mat2(m) => write!(f, "{m}"),
            GroupElement::CircleExact(v) => write!(f, "{v}"),
            GroupElement::TupleTime(inner) => write!(f, "{inner}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renormalizes_determinant() {
        let m = Mat2::new(2.0, 0.0, 0.0, 2.0).unwrap();
        assert!((m.det() - 1.0).abs() < 1e-15);
        assert!(Mat2::new(1.0, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn paper_families_have_unit_determinant() {
        for n in 1..50 {
            let n = f64::from(n);
            assert!((Mat2::contracting(n).det() - 1.0).abs() < 1e-12);
            assert!((Mat2::separating(n).det() - 1.0).abs() < 1e-12);
            assert_eq!(Mat2::separating(n).sup_norm(), n.max(1.0));
        }
    }

    #[test]
    fn compose_matches_kinds() {
        let a = GroupElement::IntTime(3);
        assert_eq!(a.compose(&GroupElement::IntTime(4)), Ok(GroupElement::IntTime(7)));
        assert!(a.compose(&GroupElement::RealTime(1.0)).is_err());
        let s = GroupElement::circle(QSqrt2::from_ratios((3, 4), (0, 1)));
        let t = GroupElement::circle(QSqrt2::from_ratios((1, 2), (0, 1)));
        assert_eq!(
            s.compose(&t).unwrap(),
            GroupElement::CircleExact(QSqrt2::from_ratios((1, 4), (0, 1)))
        );
    }

    #[test]
    fn parse_matrix() {
        let g = GroupElement::parse(ElementKind::Mat2, "[[0,-1],[1,0]]").unwrap();
        assert_eq!(g, GroupElement::Mat2(Mat2::new(0.0, -1.0, 1.0, 0.0).unwrap()));
    }
}
