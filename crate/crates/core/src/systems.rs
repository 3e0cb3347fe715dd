//! Catalog of concrete systems and their action evaluators.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicalSystem;
use crate::element::{ElementKind, GroupElement, Mat2};
use crate::error::{ChaosError, Result};
use crate::qsqrt2::QSqrt2;
use crate::space::{wrap_unit, ExtReal, Point, SpaceKind, TwoCircleNbhd, TwoCirclePoint, Word};

pub use crate::space::two_circle_membership;

/// Denominators smaller than this are treated as poles.
pub const POLE_THRESHOLD: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CatalogEntry {
    /// `x ↦ x + t` on `R ∪ {∞}`, `t ∈ R`.
    TranslationFlow,
    /// `x ↦ x + n` on `Z ∪ {∞}`, `n ∈ Z`.
    IntegerTranslation,
    /// `x ↦ x + nα (mod 1)`, `n ∈ Z`.
    CircleRotation { alpha: f64 },
    /// Fractional-linear action of `SL(2,R)` on `R ∪ {∞}`.
    Mobius,
    /// One-sided shift on `σ` symbols, words truncated at `length`.
    FullShift { alphabet: u8, length: usize },
    /// Two copies of the circle with the half-open basis; the discrete
    /// circle group acts by rotation on both levels.
    TwoCircle,
}

impl CatalogEntry {
    pub fn name(&self) -> String {
        match self {
            CatalogEntry::TranslationFlow => "translation_flow".into(),
            CatalogEntry::IntegerTranslation => "integer_translation".into(),
            CatalogEntry::CircleRotation { alpha } => format!("circle_rotation({alpha})"),
            CatalogEntry::Mobius => "mobius".into(),
            CatalogEntry::FullShift { alphabet, length } => {
                format!("full_shift({alphabet},{length})")
            }
            CatalogEntry::TwoCircle => "two_circle".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CatalogEntry::CircleRotation { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => Err(
                ChaosError::usage(format!("rotation number {alpha} must lie in (0,1)")),
            ),
            CatalogEntry::FullShift { alphabet, .. } if *alphabet < 2 => {
                Err(ChaosError::usage("shift alphabet must have at least 2 symbols"))
            }
            CatalogEntry::FullShift { length, .. } if *length < 8 => {
                Err(ChaosError::usage("shift truncation must be at least 8"))
            }
            _ => Ok(()),
        }
    }

    pub fn space(&self) -> SpaceKind {
        match self {
            CatalogEntry::TranslationFlow | CatalogEntry::Mobius => {
                SpaceKind::ProjReal { integers_only: false }
            }
            CatalogEntry::IntegerTranslation => SpaceKind::ProjReal { integers_only: true },
            CatalogEntry::CircleRotation { .. } => SpaceKind::Circle,
            CatalogEntry::FullShift { alphabet, length } => SpaceKind::Shift {
                alphabet: *alphabet,
                length: *length,
            },
            CatalogEntry::TwoCircle => SpaceKind::TwoCircle,
        }
    }

    pub fn element_kind(&self) -> ElementKind {
        match self {
            CatalogEntry::TranslationFlow => ElementKind::RealTime,
            CatalogEntry::IntegerTranslation
            | CatalogEntry::CircleRotation { .. }
            | CatalogEntry::FullShift { .. } => ElementKind::IntTime,
            CatalogEntry::Mobius => ElementKind::Mat2,
            CatalogEntry::TwoCircle => ElementKind::CircleExact,
        }
    }

    pub fn is_group(&self) -> bool {
        !matches!(self, CatalogEntry::FullShift { .. })
    }
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub fn build_system(entry: CatalogEntry) -> Result<DynamicalSystem> {
    entry.validate()?;
    Ok(DynamicalSystem::from_entry(entry))
}

/// `t·x = (ax+b)/(cx+d)` on `R ∪ {∞}`, with `t·∞ = a/c`.
pub fn mobius_apply(t: &Mat2, x: ExtReal) -> ExtReal {
    let (num, den) = match x {
        ExtReal::Infinity => (t.a, t.c),
        ExtReal::Finite(v) => (t.a * v + t.b, t.c * v + t.d),
    };
    if den.abs() < POLE_THRESHOLD {
        ExtReal::Infinity
    } else {
        ExtReal::Finite(num / den)
    }
}

pub(crate) fn act_base(entry: &CatalogEntry, t: &GroupElement, p: &Point) -> Result<Point> {
    let mismatch = || {
        ChaosError::usage(format!(
            "cannot act by {t} on {p} in {}",
            entry.name()
        ))
    };
    match (entry, t, p) {
        (CatalogEntry::TranslationFlow, GroupElement::RealTime(s), Point::ProjReal(x)) => {
            Ok(Point::ProjReal(match x {
                ExtReal::Finite(v) => ExtReal::Finite(v + s),
                ExtReal::Infinity => ExtReal::Infinity,
            }))
        }
        (CatalogEntry::IntegerTranslation, GroupElement::IntTime(n), Point::ProjReal(x)) => {
            Ok(Point::ProjReal(match x {
                ExtReal::Finite(v) => ExtReal::Finite(v + *n as f64),
                ExtReal::Infinity => ExtReal::Infinity,
            }))
        }
        (CatalogEntry::CircleRotation { alpha }, GroupElement::IntTime(n), Point::Circle(x)) => {
            let turn = wrap_unit((*n as f64) * alpha);
            Ok(Point::Circle(wrap_unit(x + turn)))
        }
        (CatalogEntry::Mobius, GroupElement::Mat2(m), Point::ProjReal(x)) => {
            Ok(Point::ProjReal(mobius_apply(m, *x)))
        }
        (CatalogEntry::FullShift { .. }, GroupElement::IntTime(n), Point::Word(w)) => {
            shift_word(w, *n).map(Point::Word)
        }
        (CatalogEntry::TwoCircle, GroupElement::CircleExact(s), Point::TwoCircle(q)) => {
            Ok(Point::TwoCircle(TwoCirclePoint {
                angle: (&q.angle + s).fract(),
                level: q.level,
            }))
        }
        _ => Err(mismatch()),
    }
}

/// Drops the first `n` symbols.
pub fn shift_word(w: &Word, n: i64) -> Result<Word> {
    if n < 0 {
        return Err(ChaosError::usage("the shift acts by nonnegative times only"));
    }
    let n = n as usize;
    if n >= w.len() {
        return Err(ChaosError::HorizonExhausted {
            needed: n + 1,
            available: w.len(),
        });
    }
    Ok(Word {
        alphabet: w.alphabet,
        symbols: w.symbols[n..].to_vec(),
    })
}

/// Homogeneous coordinates of a point of `R ∪ {∞}`.
fn homogeneous(x: ExtReal) -> (f64, f64) {
    match x {
        ExtReal::Finite(v) => (v, 1.0),
        ExtReal::Infinity => (1.0, 0.0),
    }
}

/// Matrix of `GL(2,R)` sending `0 ↦ p` and `∞ ↦ q`.
fn frame(p: ExtReal, q: ExtReal) -> [f64; 4] {
    let (p1, p2) = homogeneous(p);
    let (q1, q2) = homogeneous(q);
    // columns: image of e1 = [1:0] = ∞ is q, image of e2 = [0:1] = 0 is p
    [q1, p1, q2, p2]
}

/// Closed-form `t ∈ SL(2,R)` with `t·x1 = y1` and `t·x2 = y2`.
///
/// Requires `x1 ≠ x2` and `y1 ≠ y2`. The orientation flip `x ↦ -x` is
/// inserted when needed so the determinant is positive.
pub fn mobius_two_point(x1: ExtReal, x2: ExtReal, y1: ExtReal, y2: ExtReal) -> Result<Mat2> {
    let fx = frame(x1, x2);
    let fy = frame(y1, y2);
    let det_x = fx[0] * fx[3] - fx[1] * fx[2];
    let det_y = fy[0] * fy[3] - fy[1] * fy[2];
    if det_x.abs() < 1e-12 || det_y.abs() < 1e-12 {
        return Err(ChaosError::usage("two-point normalization needs distinct points"));
    }
    // inverse of fx
    let ix = [fx[3] / det_x, -fx[1] / det_x, -fx[2] / det_x, fx[0] / det_x];
    // D = diag(λ, 1) fixes 0 and ∞
    let lambda = if det_y / det_x > 0.0 { 1.0 } else { -1.0 };
    let dy = [fy[0] * lambda, fy[1], fy[2] * lambda, fy[3]];
    let m = [
        dy[0] * ix[0] + dy[1] * ix[2],
        dy[0] * ix[1] + dy[1] * ix[3],
        dy[2] * ix[0] + dy[3] * ix[2],
        dy[2] * ix[1] + dy[3] * ix[3],
    ];
    Mat2::new(m[0], m[1], m[2], m[3])
}

/// Some `t ∈ SL(2,R)` with `t·x = y`.
pub fn mobius_transport(x: ExtReal, y: ExtReal) -> Result<Mat2> {
    let aux = |v: ExtReal| match v {
        ExtReal::Infinity => ExtReal::Finite(0.0),
        ExtReal::Finite(a) => ExtReal::Finite(a + 1.0),
    };
    mobius_two_point(x, aux(x), y, aux(y))
}

/// A neighbourhood of the diagonal of the two-circle space,
/// `α = ⋃_z N_{ε(z)}(z) × N_{ε(z)}(z)` with
/// `ε(z) = min(cap, arc(z, focus)/2)` away from the focus and `ε(focus) = cap`.
///
/// Its radius shrinks towards the focus, so pairs straddling the focus
/// escape it no matter how close they are.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocusedEntourage {
    pub focus: QSqrt2,
    #[serde(with = "crate::space::rational_serde")]
    pub cap: BigRational,
}

impl FocusedEntourage {
    pub fn new(focus: QSqrt2, cap: BigRational) -> Result<FocusedEntourage> {
        let quarter = BigRational::new(1.into(), 4.into());
        if cap <= BigRational::zero() || cap > quarter {
            return Err(ChaosError::usage("entourage cap must lie in (0, 1/4]"));
        }
        Ok(FocusedEntourage {
            focus: focus.fract(),
            cap,
        })
    }

    fn radius_at(&self, c: &QSqrt2) -> QSqrt2 {
        let cap = QSqrt2::rational(self.cap.clone());
        let d = crate::space::signed_offset(c, &self.focus).abs();
        let half_d = d.scale(&BigRational::new(1.into(), 2.into()));
        if half_d < cap {
            half_d
        } else {
            cap
        }
    }

    /// Decides `(p, q) ∈ α` exactly.
    pub fn contains(&self, p: &TwoCirclePoint, q: &TwoCirclePoint) -> bool {
        // The focus carries the full cap; handle it directly.
        for level in 0..=1u8 {
            let n = TwoCircleNbhd {
                center: TwoCirclePoint {
                    angle: self.focus.clone(),
                    level,
                },
                radius: self.cap.clone(),
            };
            if two_circle_membership(p, &n) && two_circle_membership(q, &n) {
                return true;
            }
        }
        // Both points must lie within 2·cap ≤ 1/2 of each other.
        let off = crate::space::signed_offset(&q.angle, &p.angle);
        let (lo, hi) = if off >= QSqrt2::zero() { (p, q) } else { (q, p) };
        let gap = off.abs();
        // Level-0 centres sit at lo - s (s ≥ 0); the slack ε(c) - (gap + s)
        // strictly decreases in s, so only s = 0 or s → 0+ matters.
        let zero = QSqrt2::zero();
        let level0 = {
            let c = lo.angle.clone();
            let eps = self.radius_at(&c);
            // offsets: lo at s, hi at gap + s; level-1 points need offset > 0
            // and ≤ ε, level-0 points need offset ≥ 0 and < ε.
            let s_zero_allowed = lo.level == 0 && (hi.level == 0 || gap > zero);
            let hi_ok = |e: &QSqrt2| {
                if hi.level == 0 {
                    &gap < e
                } else {
                    &gap <= e
                }
            };
            let at_zero = s_zero_allowed && c != self.focus && hi_ok(&eps);
            // s → 0+: every constraint is open on that side; needs strict slack.
            let limit = gap < eps;
            at_zero || limit
        };
        if level0 {
            return true;
        }
        // Level-1 centres sit at hi + s; offsets are -s (hi) and -(gap + s) (lo).
        let c = hi.angle.clone();
        let eps = self.radius_at(&c);
        let s_zero_allowed = hi.level == 1 && (lo.level == 1 || gap > zero);
        let lo_ok = |e: &QSqrt2| {
            if lo.level == 0 {
                &gap <= e
            } else {
                &gap < e
            }
        };
        let at_zero = s_zero_allowed && c != self.focus && lo_ok(&eps);
        let limit = gap < eps;
        at_zero || limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(v: f64) -> ExtReal {
        ExtReal::Finite(v)
    }

    #[test]
    fn mobius_examples() {
        let s3 = Mat2::separating(3.0);
        match mobius_apply(&s3, ext(1.0)) {
            ExtReal::Finite(v) => assert!((v - 2.25).abs() < 1e-15),
            _ => panic!("finite expected"),
        }
        assert_eq!(mobius_apply(&Mat2::IDENTITY, ext(0.3)), ext(0.3));
        let upper = Mat2::new(1.0, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(mobius_apply(&upper, ExtReal::Infinity), ExtReal::Infinity);
        let rot = Mat2::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(mobius_apply(&rot, ext(0.0)), ExtReal::Infinity);
    }

    #[test]
    fn catalog_validation() {
        assert!(build_system(CatalogEntry::CircleRotation { alpha: 1.5 }).is_err());
        assert!(build_system(CatalogEntry::FullShift {
            alphabet: 1,
            length: 64
        })
        .is_err());
        assert!(build_system(CatalogEntry::FullShift {
            alphabet: 2,
            length: 4
        })
        .is_err());
    }

    #[test]
    fn translation_fixes_infinity() {
        let flow = build_system(CatalogEntry::TranslationFlow).unwrap();
        for t in [-5.0, 0.0, 2.5, 1e6] {
            assert_eq!(
                flow.act(&GroupElement::RealTime(t), &Point::infinity()).unwrap(),
                Point::infinity()
            );
        }
    }

    #[test]
    fn two_circle_action_keeps_level() {
        let sys = build_system(CatalogEntry::TwoCircle).unwrap();
        let y = QSqrt2::from_ratios((1, 3), (0, 1));
        let p = Point::TwoCircle(TwoCirclePoint::new(y.clone(), 1).unwrap());
        let out = sys
            .act(&GroupElement::circle(QSqrt2::sqrt2()), &p)
            .unwrap();
        let expected = TwoCirclePoint::new(&y + &QSqrt2::sqrt2(), 1).unwrap();
        assert_eq!(out, Point::TwoCircle(expected));
    }

    #[test]
    fn two_point_solver() {
        let cases = [
            (ext(0.0), ext(1.0), ext(5.0), ExtReal::Infinity),
            (ExtReal::Infinity, ext(-2.0), ext(1.0), ext(0.0)),
            (ext(3.0), ext(-1.0), ext(-1.0), ext(3.0)),
        ];
        for (x1, x2, y1, y2) in cases {
            let t = mobius_two_point(x1, x2, y1, y2).unwrap();
            assert!((t.det() - 1.0).abs() < 1e-12);
            assert!(crate::space::chordal(mobius_apply(&t, x1), y1) < 1e-12);
            assert!(crate::space::chordal(mobius_apply(&t, x2), y2) < 1e-12);
        }
        assert!(mobius_two_point(ext(1.0), ext(1.0), ext(0.0), ext(2.0)).is_err());
    }

    #[test]
    fn focused_entourage_separates_straddling_pairs() {
        let alpha = FocusedEntourage::new(QSqrt2::zero(), BigRational::new(1.into(), 4.into()))
            .unwrap();
        for k in [2i64, 10, 1000] {
            let r = QSqrt2::from_ratios((1, k), (0, 1));
            let half = r.scale(&BigRational::new(1.into(), 2.into()));
            let p = TwoCirclePoint::new(-half.clone(), 0).unwrap();
            let q = TwoCirclePoint::new(half.clone(), 1).unwrap();
            assert!(!alpha.contains(&p, &q));
            assert!(!alpha.contains(&q, &p));
            let p = TwoCirclePoint::new(half.clone(), 1).unwrap();
            let q = TwoCirclePoint::new(-half, 0).unwrap();
            assert!(!alpha.contains(&p, &q));
        }
        // far from the focus, nearby pairs stay together
        let p = TwoCirclePoint::new(QSqrt2::from_ratios((1, 2), (0, 1)), 0).unwrap();
        let q = TwoCirclePoint::new(QSqrt2::from_ratios((51, 100), (0, 1)), 1).unwrap();
        assert!(alpha.contains(&p, &q));
        assert!(alpha.contains(&p, &p));
        // the diagonal at the focus itself
        let f = TwoCirclePoint::new(QSqrt2::zero(), 1).unwrap();
        assert!(alpha.contains(&f, &f));
    }
}
