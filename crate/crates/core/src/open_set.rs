//! The open-set grammar shared by hitting-time scans and detectors: metric
//! balls, shift cylinders with wildcards, two-circle basis sets and their
//! finite products.

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicalSystem;
use crate::error::{ChaosError, Result};
use crate::qsqrt2::QSqrt2;
use crate::space::{
    chordal, two_circle_membership, wrap_unit, ExtReal, Point, SpaceKind, TwoCircleNbhd,
    TwoCirclePoint, Word,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OpenSet {
    /// Open metric ball `{p : d(center, p) < radius}`.
    Ball { center: Point, radius: f64 },
    /// Shift words matching every fixed symbol; `None` is a wildcard.
    Pattern(Vec<Option<u8>>),
    Basis(TwoCircleNbhd),
    Product(Vec<OpenSet>),
}

impl OpenSet {
    pub fn cylinder(prefix: &[u8]) -> OpenSet {
        OpenSet::Pattern(prefix.iter().map(|&s| Some(s)).collect())
    }

    pub fn ball(center: Point, radius: f64) -> OpenSet {
        OpenSet::Ball { center, radius }
    }

    pub fn pattern(&self) -> Option<&[Option<u8>]> {
        match self {
            OpenSet::Pattern(p) => Some(p),
            _ => None,
        }
    }

    pub fn contains(&self, system: &DynamicalSystem, p: &Point) -> Result<bool> {
        let space = system.space();
        self.contains_in(&space, p)
    }

    pub fn contains_in(&self, space: &SpaceKind, p: &Point) -> Result<bool> {
        match (self, space, p) {
            (OpenSet::Ball { center, radius }, _, _) => Ok(space.distance(center, p)? < *radius),
            (OpenSet::Pattern(pat), SpaceKind::Shift { .. }, Point::Word(w)) => {
                Ok(pattern_matches(pat, w))
            }
            (OpenSet::Basis(n), SpaceKind::TwoCircle, Point::TwoCircle(q)) => {
                Ok(two_circle_membership(q, n))
            }
            (OpenSet::Product(parts), SpaceKind::Product { inner, arity }, Point::Tuple(c))
                if parts.len() == *arity && c.len() == *arity =>
            {
                for (u, q) in parts.iter().zip(c) {
                    if !u.contains_in(inner, q)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Err(ChaosError::usage(format!(
                "open set {self} does not fit the {} space",
                space.name()
            ))),
        }
    }

    /// A representative point; the first entry of [`OpenSet::samples`].
    pub fn representative(&self, system: &DynamicalSystem) -> Result<Point> {
        self.samples_in(&system.space(), 1)?
            .into_iter()
            .next()
            .ok_or_else(|| ChaosError::usage(format!("open set {self} has no sample points")))
    }

    /// Finitely many points of the set, center first. `per_side` controls
    /// the density.
    pub fn samples(&self, system: &DynamicalSystem, per_side: usize) -> Result<Vec<Point>> {
        self.samples_in(&system.space(), per_side)
    }

    pub fn samples_in(&self, space: &SpaceKind, per_side: usize) -> Result<Vec<Point>> {
        let out = match (self, space) {
            (OpenSet::Ball { center, radius }, SpaceKind::ProjReal { integers_only: false }) => {
                let c = center
                    .as_ext_real()
                    .ok_or_else(|| ChaosError::usage("ball center is not an extended real"))?;
                let half_width = radius.min(1.0).asin() * 0.999;
                let mut pts = vec![center.clone()];
                for k in 1..=per_side {
                    let off = half_width * k as f64 / per_side as f64;
                    for s in [1.0, -1.0] {
                        pts.push(Point::ProjReal(ExtReal::from_angle(c.angle() + s * off)));
                    }
                }
                pts
            }
            (OpenSet::Ball { center, radius }, SpaceKind::ProjReal { integers_only: true }) => {
                integer_ball_samples(center, *radius, per_side)?
            }
            (OpenSet::Ball { center, radius }, SpaceKind::Circle) => {
                let c = match center {
                    Point::Circle(c) => *c,
                    _ => return Err(ChaosError::usage("ball center is not a circle point")),
                };
                let half_width = radius.min(0.5) * 0.999;
                let mut pts = vec![center.clone()];
                for k in 1..=per_side {
                    let off = half_width * k as f64 / per_side as f64;
                    pts.push(Point::Circle(wrap_unit(c + off)));
                    pts.push(Point::Circle(wrap_unit(c - off)));
                }
                pts
            }
            (OpenSet::Ball { center, radius }, SpaceKind::Shift { length, .. }) => {
                let w = center
                    .as_word()
                    .ok_or_else(|| ChaosError::usage("ball center is not a word"))?;
                // d < r ⇔ agreement on the first m symbols, 2^-m < r
                let m = depth_for_radius(*radius).min(*length);
                let mut pts = vec![center.clone()];
                for k in 0..per_side.min(length - m) {
                    let mut v = w.clone();
                    let i = m + k;
                    v.symbols[i] = (v.symbols[i] + 1) % v.alphabet;
                    pts.push(Point::Word(v));
                }
                pts
            }
            (OpenSet::Pattern(pat), SpaceKind::Shift { alphabet, length }) => {
                pattern_samples(pat, *alphabet, *length, per_side)?
            }
            (OpenSet::Basis(n), SpaceKind::TwoCircle) => {
                let mut pts = vec![Point::TwoCircle(n.center.clone())];
                let sign = if n.center.level == 0 { 1 } else { -1 };
                for k in 1..=per_side.max(1) as i64 {
                    let off = n
                        .radius
                        .clone()
                        * BigRational::new((sign * k).into(), (per_side.max(1) as i64 + 1).into());
                    let angle = &n.center.angle + &QSqrt2::rational(off);
                    for level in 0..=1 {
                        let q = TwoCirclePoint::new(angle.clone(), level)?;
                        if two_circle_membership(&q, n) {
                            pts.push(Point::TwoCircle(q));
                        }
                    }
                }
                pts
            }
            (OpenSet::Product(parts), SpaceKind::Product { inner, arity })
                if parts.len() == *arity =>
            {
                let per = parts
                    .iter()
                    .map(|u| u.samples_in(inner, per_side))
                    .collect::<Result<Vec<_>>>()?;
                // Diagonal of the sample lists plus every center combination
                // with single-coordinate variation keeps the count linear.
                let mut pts = Vec::new();
                let longest = per.iter().map(Vec::len).max().unwrap_or(0);
                for i in 0..longest {
                    pts.push(Point::Tuple(
                        per.iter().map(|s| s[i.min(s.len() - 1)].clone()).collect(),
                    ));
                }
                for (c, s) in per.iter().enumerate() {
                    for q in s.iter().skip(1) {
                        let mut tuple: Vec<Point> = per.iter().map(|s| s[0].clone()).collect();
                        tuple[c] = q.clone();
                        pts.push(Point::Tuple(tuple));
                    }
                }
                pts
            }
            _ => {
                return Err(ChaosError::usage(format!(
                    "open set {self} does not fit the {} space",
                    space.name()
                )))
            }
        };
        Ok(out)
    }
}

/// Smallest `m` with `2^-m < r`.
pub fn depth_for_radius(r: f64) -> usize {
    let mut m = 0usize;
    while 0.5f64.powi(m as i32) >= r && m < 1100 {
        m += 1;
    }
    m
}

pub fn pattern_matches(pat: &[Option<u8>], w: &Word) -> bool {
    pat.iter().enumerate().all(|(i, s)| match s {
        None => true,
        Some(v) => w.symbols.get(i) == Some(v),
    })
}

fn pattern_samples(pat: &[Option<u8>], alphabet: u8, length: usize, per_side: usize) -> Result<Vec<Point>> {
    if pat.len() > length {
        return Err(ChaosError::HorizonExhausted {
            needed: pat.len(),
            available: length,
        });
    }
    let fillers: Vec<Box<dyn Fn(usize) -> u8>> = vec![
        Box::new(|_| 0),
        Box::new(move |_| alphabet - 1),
        Box::new(move |i| (i % alphabet as usize) as u8),
        Box::new(move |i| ((i / 2) % alphabet as usize) as u8),
    ];
    let mut pts = Vec::new();
    for f in fillers.iter().take(per_side.max(1)) {
        let symbols = (0..length)
            .map(|i| match pat.get(i) {
                Some(Some(s)) => *s,
                _ => f(i),
            })
            .collect();
        let p = Point::Word(Word::new(alphabet, symbols)?);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    Ok(pts)
}

fn integer_ball_samples(center: &Point, radius: f64, per_side: usize) -> Result<Vec<Point>> {
    let c = center
        .as_ext_real()
        .ok_or_else(|| ChaosError::usage("ball center is not an extended real"))?;
    let mut pts = vec![center.clone()];
    let inside = |v: ExtReal| chordal(c, v) < radius;
    match c {
        ExtReal::Finite(x) => {
            let k = per_side as i64;
            for j in 1..=k.max(1) * 4 {
                for s in [1.0, -1.0] {
                    let v = ExtReal::Finite(x + s * j as f64);
                    if inside(v) && pts.len() < 2 * per_side + 1 {
                        pts.push(Point::ProjReal(v));
                    }
                }
            }
            if inside(ExtReal::Infinity) {
                pts.push(Point::infinity());
            }
        }
        ExtReal::Infinity => {
            // |n| > n0 lies inside; sample just past the threshold.
            let n0 = if radius >= 1.0 {
                0.0
            } else {
                ((1.0 / (radius * radius)) - 1.0).sqrt().floor() + 1.0
            };
            for j in 0..per_side.max(1) {
                for s in [1.0, -1.0] {
                    let v = ExtReal::Finite(s * (n0 + j as f64));
                    if inside(v) {
                        pts.push(Point::ProjReal(v));
                    }
                }
            }
        }
    }
    Ok(pts)
}

/// Intersection of two circle balls, as a ball (arcs intersect in an arc).
pub fn circle_ball_intersection(a: &OpenSet, b: &OpenSet) -> Option<OpenSet> {
    let (ca, ra, cb, rb) = match (a, b) {
        (
            OpenSet::Ball {
                center: Point::Circle(ca),
                radius: ra,
            },
            OpenSet::Ball {
                center: Point::Circle(cb),
                radius: rb,
            },
        ) => (*ca, *ra, *cb, *rb),
        _ => return None,
    };
    // represent b's center relative to a's
    let mut off = cb - ca;
    off -= off.round();
    let lo = (-ra).max(off - rb);
    let hi = ra.min(off + rb);
    if hi - lo <= 1e-12 || ra >= 0.5 || rb >= 0.5 {
        return None;
    }
    let mid = ca + (lo + hi) / 2.0;
    Some(OpenSet::Ball {
        center: Point::Circle(wrap_unit(mid)),
        radius: (hi - lo) / 2.0,
    })
}

/// Moves a circle ball by `-shift` (the preimage under rotation by `shift`).
pub fn circle_ball_preimage(u: &OpenSet, shift: f64) -> Option<OpenSet> {
    match u {
        OpenSet::Ball {
            center: Point::Circle(c),
            radius,
        } => Some(OpenSet::Ball {
            center: Point::Circle(wrap_unit(c - shift)),
            radius: *radius,
        }),
        _ => None,
    }
}

/// Merges two patterns; `None` when a fixed symbol conflicts.
pub fn merge_patterns(a: &[Option<u8>], b: &[Option<u8>]) -> Option<Vec<Option<u8>>> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().flatten();
        let y = b.get(i).copied().flatten();
        out.push(match (x, y) {
            (Some(p), Some(q)) if p != q => return None,
            (Some(p), _) | (_, Some(p)) => Some(p),
            _ => None,
        });
    }
    Some(out)
}

/// The pattern describing `σ^{-n}[pat]`.
pub fn shift_preimage(pat: &[Option<u8>], n: usize) -> Vec<Option<u8>> {
    let mut out = vec![None; n];
    out.extend_from_slice(pat);
    out
}

impl fmt::Display for OpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpenSet::Ball { center, radius } => write!(f, "B({center}, {radius})"),
            OpenSet::Pattern(p) => {
                write!(f, "[")?;
                for s in p {
                    match s {
                        Some(v) => write!(f, "{v}")?,
                        None => write!(f, "?")?,
                    }
                }
                write!(f, "]")
            }
            OpenSet::Basis(n) => write!(
                f,
                "N({}, {})",
                n.center,
                crate::qsqrt2::format_rational(&n.radius)
            ),
            OpenSet::Product(parts) => {
                for (i, u) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "x")?;
                    }
                    write!(f, "{u}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `[01?1]`-style patterns (brackets optional).
pub fn parse_pattern(s: &str) -> Result<Vec<Option<u8>>> {
    s.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .chars()
        .map(|c| match c {
            '?' | '*' => Ok(None),
            d => d
                .to_digit(36)
                .map(|v| Some(v as u8))
                .ok_or_else(|| ChaosError::usage(format!("invalid pattern symbol `{d}`"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{build_system, CatalogEntry};

    #[test]
    fn samples_lie_inside() {
        let cases: Vec<(DynamicalSystem, OpenSet)> = vec![
            (
                build_system(CatalogEntry::TranslationFlow).unwrap(),
                OpenSet::ball(Point::infinity(), 0.1),
            ),
            (
                build_system(CatalogEntry::IntegerTranslation).unwrap(),
                OpenSet::ball(Point::infinity(), 0.1),
            ),
            (
                build_system(CatalogEntry::IntegerTranslation).unwrap(),
                OpenSet::ball(Point::real(3.0), 0.3),
            ),
            (
                build_system(CatalogEntry::CircleRotation { alpha: 0.3 }).unwrap(),
                OpenSet::ball(Point::circle(0.99), 0.05),
            ),
            (
                build_system(CatalogEntry::FullShift {
                    alphabet: 2,
                    length: 16,
                })
                .unwrap(),
                OpenSet::Pattern(parse_pattern("[1?0]").unwrap()),
            ),
        ];
        for (sys, u) in cases {
            let pts = u.samples(&sys, 4).unwrap();
            assert!(!pts.is_empty());
            for p in pts {
                assert!(u.contains(&sys, &p).unwrap(), "{p} not in {u}");
            }
        }
    }

    #[test]
    fn pattern_algebra() {
        let a = parse_pattern("0?1").unwrap();
        let b = parse_pattern("?11").unwrap();
        assert_eq!(merge_patterns(&a, &b), Some(parse_pattern("011").unwrap()));
        assert_eq!(merge_patterns(&a, &parse_pattern("1").unwrap()), None);
        assert_eq!(shift_preimage(&b, 2), parse_pattern("???11").unwrap());
        assert_eq!(depth_for_radius(0.5), 2);
        assert_eq!(depth_for_radius(0.01), 7);
    }

    #[test]
    fn arc_intersection() {
        let a = OpenSet::ball(Point::circle(0.95), 0.1);
        let b = OpenSet::ball(Point::circle(0.05), 0.1);
        match circle_ball_intersection(&a, &b).unwrap() {
            OpenSet::Ball { center, radius } => {
                assert!(crate::space::arc(center.as_circle(), 0.0) < 1e-12);
                assert!((radius - 0.05).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
        let far = OpenSet::ball(Point::circle(0.5), 0.1);
        assert!(circle_ball_intersection(&a, &far).is_none());
    }

    impl Point {
        fn as_circle(&self) -> f64 {
            match self {
                Point::Circle(x) => *x,
                _ => panic!(),
            }
        }
    }
}
