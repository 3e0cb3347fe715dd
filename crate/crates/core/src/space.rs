//! Phase spaces, their points and compatible metrics.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{ChaosError, Result};
use crate::qsqrt2::QSqrt2;

/// A point of the extended real line, `R ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinity => None,
        }
    }

    /// Angle coordinate `atan(x)` folded into `[0, π)`; `∞` sits at `π/2`.
    ///
    /// The chordal distance equals `|sin(φx - φy)|` in this coordinate.
    pub fn angle(self) -> f64 {
        match self {
            ExtReal::Infinity => std::f64::consts::FRAC_PI_2,
            ExtReal::Finite(x) => {
                let a = x.atan();
                if a < 0.0 {
                    a + std::f64::consts::PI
                } else {
                    a
                }
            }
        }
    }

    pub fn from_angle(phi: f64) -> ExtReal {
        let phi = phi.rem_euclid(std::f64::consts::PI);
        if (phi - std::f64::consts::FRAC_PI_2).abs() < 1e-15 {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(phi.tan())
        }
    }

    pub fn parse(s: &str) -> Result<ExtReal> {
        let t = s.trim();
        match t {
            "inf" | "∞" | "infinity" | "Infinity" => Ok(ExtReal::Infinity),
            _ => t
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(ExtReal::Finite)
                .ok_or_else(|| ChaosError::usage(format!("invalid extended real `{s}`"))),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinity => write!(f, "inf"),
        }
    }
}

/// Chordal metric on `R ∪ {∞}`.
pub fn chordal(x: ExtReal, y: ExtReal) -> f64 {
    match (x, y) {
        (ExtReal::Infinity, ExtReal::Infinity) => 0.0,
        (ExtReal::Finite(a), ExtReal::Infinity) | (ExtReal::Infinity, ExtReal::Finite(a)) => {
            1.0 / a.hypot(1.0)
        }
        (ExtReal::Finite(a), ExtReal::Finite(b)) => {
            if a == b {
                0.0
            } else {
                (a - b).abs() / (a.hypot(1.0) * b.hypot(1.0))
            }
        }
    }
}

/// Arc distance on `R/Z`.
pub fn arc(x: f64, y: f64) -> f64 {
    // order the arguments so the result is exactly symmetric
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let d = (y - x).rem_euclid(1.0);
    d.min(1.0 - d)
}

pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs.
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A truncated one-sided sequence over `{0, .., alphabet-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub alphabet: u8,
    pub symbols: Vec<u8>,
}

impl Word {
    pub fn new(alphabet: u8, symbols: Vec<u8>) -> Result<Word> {
        if alphabet < 2 {
            return Err(ChaosError::usage("alphabet size must be at least 2"));
        }
        if let Some(bad) = symbols.iter().find(|&&s| s >= alphabet) {
            return Err(ChaosError::usage(format!(
                "symbol {bad} outside alphabet of size {alphabet}"
            )));
        }
        Ok(Word { alphabet, symbols })
    }

    /// Word of length `len` repeating `block` periodically.
    pub fn periodic(alphabet: u8, block: &[u8], len: usize) -> Result<Word> {
        if block.is_empty() {
            return Err(ChaosError::usage("periodic block must be nonempty"));
        }
        Word::new(alphabet, block.iter().copied().cycle().take(len).collect())
    }

    pub fn zeros(alphabet: u8, len: usize) -> Word {
        Word {
            alphabet,
            symbols: vec![0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// First index where the two words differ within their common length.
    pub fn first_difference(&self, other: &Word) -> Option<usize> {
        self.symbols
            .iter()
            .zip(&other.symbols)
            .position(|(a, b)| a != b)
    }

    pub fn parse(alphabet: u8, s: &str, len: usize) -> Result<Word> {
        let mut symbols = Vec::with_capacity(len);
        for c in s.trim().chars() {
            let d = c
                .to_digit(36)
                .ok_or_else(|| ChaosError::usage(format!("invalid symbol `{c}` in word")))?;
            symbols.push(d as u8);
        }
        if symbols.len() > len {
            return Err(ChaosError::usage(format!(
                "word of length {} exceeds truncation {len}",
                symbols.len()
            )));
        }
        symbols.resize(len, 0);
        Word::new(alphabet, symbols)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{}", char::from_digit(u32::from(*s), 36).unwrap_or('?'))?;
        }
        Ok(())
    }
}

/// A point `(y, level)` of the two-circle space, with `y` exact in `Q(√2)`, reduced mod 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoCirclePoint {
    pub angle: QSqrt2,
    pub level: u8,
}

impl TwoCirclePoint {
    pub fn new(angle: QSqrt2, level: u8) -> Result<TwoCirclePoint> {
        if level > 1 {
            return Err(ChaosError::usage("two-circle level must be 0 or 1"));
        }
        Ok(TwoCirclePoint {
            angle: angle.fract(),
            level,
        })
    }

    /// Parses `angle@level`, e.g. `1/3+1/2r2@1`.
    pub fn parse(s: &str) -> Result<TwoCirclePoint> {
        let (a, l) = s
            .trim()
            .rsplit_once('@')
            .ok_or_else(|| ChaosError::usage(format!("two-circle point `{s}` lacks `@level`")))?;
        let level: u8 = l
            .trim()
            .parse()
            .map_err(|_| ChaosError::usage(format!("invalid level in `{s}`")))?;
        TwoCirclePoint::new(a.parse()?, level)
    }
}

impl fmt::Display for TwoCirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.angle, self.level)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Point {
    ProjReal(ExtReal),
    Circle(f64),
    Word(Word),
    TwoCircle(TwoCirclePoint),
    Tuple(Vec<Point>),
}

impl Point {
    pub fn real(x: f64) -> Point {
        Point::ProjReal(ExtReal::Finite(x))
    }

    pub fn infinity() -> Point {
        Point::ProjReal(ExtReal::Infinity)
    }

    pub fn circle(x: f64) -> Point {
        Point::Circle(wrap_unit(x))
    }

    pub fn as_ext_real(&self) -> Option<ExtReal> {
        match self {
            Point::ProjReal(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_word(&self) -> Option<&Word> {
        match self {
            Point::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_two_circle(&self) -> Option<&TwoCirclePoint> {
        match self {
            Point::TwoCircle(p) => Some(p),
            _ => None,
        }
    }

    pub fn components(&self) -> Option<&[Point]> {
        match self {
            Point::Tuple(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::ProjReal(x) => write!(f, "{x}"),
            Point::Circle(x) => write!(f, "{x}"),
            Point::Word(w) => write!(f, "{w}"),
            Point::TwoCircle(p) => write!(f, "{p}"),
            Point::Tuple(c) => {
                write!(f, "(")?;
                for (i, p) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// The phase space of a system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    /// `R ∪ {∞}`; `integers_only` restricts finite points to `Z`.
    ProjReal { integers_only: bool },
    Circle,
    Shift { alphabet: u8, length: usize },
    TwoCircle,
    Product { inner: Box<SpaceKind>, arity: usize },
}

impl SpaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceKind::ProjReal { .. } => "proj_real",
            SpaceKind::Circle => "circle",
            SpaceKind::Shift { .. } => "shift",
            SpaceKind::TwoCircle => "two_circle",
            SpaceKind::Product { .. } => "product",
        }
    }

    pub fn is_metric(&self) -> bool {
        match self {
            SpaceKind::TwoCircle => false,
            SpaceKind::Product { inner, .. } => inner.is_metric(),
            _ => true,
        }
    }

    /// Parses a point: `inf` or a number, a circle coordinate, a word (with
    /// `(01)` meaning the block repeated to the truncation), `a+b√2@level`,
    /// or a `|`-separated tuple.
    pub fn parse_point(&self, s: &str) -> Result<Point> {
        let t = s.trim();
        let p = match self {
            SpaceKind::ProjReal { .. } => Point::ProjReal(ExtReal::parse(t)?),
            SpaceKind::Circle => Point::Circle(
                t.parse::<f64>()
                    .map_err(|_| ChaosError::usage(format!("invalid circle point `{s}`")))?,
            ),
            SpaceKind::Shift { alphabet, length } => match t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
                Some(block) => {
                    let b = Word::parse(*alphabet, block, block.chars().count())?;
                    Point::Word(Word::periodic(*alphabet, &b.symbols, *length)?)
                }
                None => Point::Word(Word::parse(*alphabet, t, *length)?),
            },
            SpaceKind::TwoCircle => Point::TwoCircle(TwoCirclePoint::parse(t)?),
            SpaceKind::Product { inner, .. } => Point::Tuple(
                t.split('|').map(|c| inner.parse_point(c)).collect::<Result<_>>()?,
            ),
        };
        self.check(&p)?;
        Ok(p)
    }

    /// Checks that `p` belongs to this space.
    pub fn check(&self, p: &Point) -> Result<()> {
        let bad = || {
            ChaosError::usage(format!(
                "point {p} does not belong to the {} space",
                self.name()
            ))
        };
        match (self, p) {
            (SpaceKind::ProjReal { integers_only }, Point::ProjReal(x)) => match x {
                ExtReal::Finite(v) if !v.is_finite() => Err(bad()),
                ExtReal::Finite(v) if *integers_only && v.fract() != 0.0 => Err(bad()),
                _ => Ok(()),
            },
            (SpaceKind::Circle, Point::Circle(x)) if (0.0..1.0).contains(x) => Ok(()),
            (SpaceKind::Shift { alphabet, length }, Point::Word(w))
                if w.alphabet == *alphabet && w.len() <= *length && !w.is_empty() =>
            {
                Ok(())
            }
            (SpaceKind::TwoCircle, Point::TwoCircle(tp))
                if tp.level <= 1
                    && tp.angle >= QSqrt2::zero()
                    && tp.angle < QSqrt2::from_int(1) =>
            {
                Ok(())
            }
            (SpaceKind::Product { inner, arity }, Point::Tuple(c)) if c.len() == *arity => {
                c.iter().try_for_each(|q| inner.check(q))
            }
            _ => Err(bad()),
        }
    }

    /// Distance between two points of this space.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        match (self, p, q) {
            (SpaceKind::TwoCircle, _, _) => Err(ChaosError::UnsupportedMetric("two_circle")),
            (SpaceKind::ProjReal { .. }, Point::ProjReal(x), Point::ProjReal(y)) => {
                Ok(chordal(*x, *y))
            }
            (SpaceKind::Circle, Point::Circle(x), Point::Circle(y)) => Ok(arc(*x, *y)),
            (SpaceKind::Shift { .. }, Point::Word(a), Point::Word(b)) => Ok(shift_distance(a, b)),
            (SpaceKind::Product { inner, arity }, Point::Tuple(a), Point::Tuple(b))
                if a.len() == *arity && b.len() == *arity =>
            {
                let mut m = 0.0f64;
                for (x, y) in a.iter().zip(b) {
                    m = m.max(inner.distance(x, y)?);
                }
                Ok(m)
            }
            _ => Err(ChaosError::usage(format!(
                "points {p} and {q} do not belong to the {} space",
                self.name()
            ))),
        }
    }
}

/// `2^(-k)` with `k` the first differing index; 0 when the words agree on
/// their common length.
pub fn shift_distance(a: &Word, b: &Word) -> f64 {
    match a.first_difference(b) {
        Some(k) => 0.5f64.powi(k as i32),
        None => 0.0,
    }
}

/// Exact basis neighbourhood `N_ε(center)` of the two-circle space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoCircleNbhd {
    pub center: TwoCirclePoint,
    #[serde(with = "rational_serde")]
    pub radius: BigRational,
}

impl TwoCircleNbhd {
    pub fn new(center: TwoCirclePoint, radius: BigRational) -> Result<TwoCircleNbhd> {
        let half = BigRational::new(1.into(), 2.into());
        if radius <= BigRational::zero() || radius >= half {
            return Err(ChaosError::usage("basis radius must lie in (0, 1/2)"));
        }
        Ok(TwoCircleNbhd { center, radius })
    }

    pub fn contains(&self, p: &TwoCirclePoint) -> bool {
        two_circle_membership(p, self)
    }
}

/// Offset of `p` from `c` as a representative in `[-1/2, 1/2)`.
pub fn signed_offset(p: &QSqrt2, c: &QSqrt2) -> QSqrt2 {
    let half = QSqrt2::from_ratios((1, 2), (0, 1));
    let shifted = (&(p - c) + &half).fract();
    &shifted - &half
}

/// Decides `p ∈ N_ε(y, j)` with the half-open conditions of the basis:
///
/// - `N_ε(y,0) = {(y+r,0) : 0 ≤ r < ε} ∪ {(y+r,1) : 0 < r ≤ ε}`
/// - `N_ε(y,1) = {(y+r,0) : -ε ≤ r < 0} ∪ {(y+r,1) : -ε < r ≤ 0}`
///
/// All comparisons are exact; the radius is below 1/2 so the offset `r` is
/// unambiguous.
pub fn two_circle_membership(p: &TwoCirclePoint, nbhd: &TwoCircleNbhd) -> bool {
    let r = signed_offset(&p.angle, &nbhd.center.angle);
    let eps = QSqrt2::rational(nbhd.radius.clone());
    let zero = QSqrt2::zero();
    match (nbhd.center.level, p.level) {
        (0, 0) => r >= zero && r < eps,
        (0, _) => r > zero && r <= eps,
        (_, 0) => r < zero && r >= -eps,
        _ => r <= zero && r > -eps,
    }
}

pub(crate) mod rational_serde {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::qsqrt2::{format_rational, QSqrt2};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        QSqrt2::parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Equality of points: exact for words, two-circle points and tuples thereof,
/// within `tol` in the metric for float spaces.
pub fn same_point(space: &SpaceKind, p: &Point, q: &Point, tol: f64) -> bool {
    match (p, q) {
        (Point::TwoCircle(a), Point::TwoCircle(b)) => a == b,
        (Point::Word(a), Point::Word(b)) => a.first_difference(b).is_none(),
        _ => space
            .distance(p, q)
            .map(|d| d <= tol)
            .unwrap_or(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tc(a: (i64, i64), b: (i64, i64), level: u8) -> TwoCirclePoint {
        TwoCirclePoint::new(QSqrt2::from_ratios(a, b), level).unwrap()
    }

    #[test]
    fn chordal_values() {
        let z = ExtReal::Finite(0.0);
        assert_eq!(chordal(z, ExtReal::Infinity), 1.0);
        assert_eq!(chordal(z, z), 0.0);
        let d = chordal(z, ExtReal::Finite(1.0));
        assert!((d - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        // |sin(φx - φy)| identity
        let (a, b) = (ExtReal::Finite(-3.0), ExtReal::Finite(0.7));
        assert!((chordal(a, b) - (a.angle() - b.angle()).sin().abs()).abs() < 1e-14);
    }

    #[test]
    fn shift_metric_first_difference() {
        let a = Word::parse(2, "0111", 8).unwrap();
        let b = Word::parse(2, "1111", 8).unwrap();
        assert_eq!(shift_distance(&a, &b), 1.0);
        let c = Word::parse(2, "0110", 8).unwrap();
        assert_eq!(shift_distance(&a, &c), 0.125);
        assert_eq!(shift_distance(&a, &a), 0.0);
    }

    #[test]
    fn two_circle_space_has_no_metric() {
        let p = Point::TwoCircle(tc((0, 1), (0, 1), 0));
        assert_eq!(
            SpaceKind::TwoCircle.distance(&p, &p),
            Err(ChaosError::UnsupportedMetric("two_circle"))
        );
    }

    #[test]
    fn kind_mismatch_is_usage_error() {
        let r = SpaceKind::Circle.distance(&Point::circle(0.1), &Point::real(0.1));
        assert!(matches!(r, Err(ChaosError::Usage(_))));
    }

    #[test]
    fn basis_membership_branches() {
        let eps = BigRational::new(1.into(), 10.into());
        let y = tc((1, 3), (0, 1), 0);
        let n0 = TwoCircleNbhd::new(y.clone(), eps.clone()).unwrap();
        // (y + ε/2, 1) ∈ N_ε(y, 0)
        assert!(two_circle_membership(&tc((1, 3), (0, 1), 1).shifted(&(1, 20)), &n0));
        // (y, 1) ∉ N_ε(y, 0)
        assert!(!two_circle_membership(&tc((1, 3), (0, 1), 1), &n0));
        // (y, 0) ∈ N_ε(y, 0)
        assert!(two_circle_membership(&y, &n0));
        // (y + ε, 0) ∉ N_ε(y, 0) but (y + ε, 1) ∈
        assert!(!two_circle_membership(&y.shifted(&(1, 10)), &n0));
        assert!(two_circle_membership(&tc((1, 3), (0, 1), 1).shifted(&(1, 10)), &n0));
        let n1 = TwoCircleNbhd::new(tc((1, 3), (0, 1), 1), eps).unwrap();
        assert!(two_circle_membership(&tc((1, 3), (0, 1), 1), &n1));
        assert!(!two_circle_membership(&y, &n1));
        assert!(two_circle_membership(&y.shifted(&(-1, 10)), &n1));
    }

    impl TwoCirclePoint {
        fn shifted(&self, r: &(i64, i64)) -> TwoCirclePoint {
            TwoCirclePoint::new(
                &self.angle + &QSqrt2::from_ratios(*r, (0, 1)),
                self.level,
            )
            .unwrap()
        }
    }
}
