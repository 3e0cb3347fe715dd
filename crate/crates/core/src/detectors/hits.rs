//! Exact hitting sets of test open sets for the catalog systems.
//!
//! The grid scan in `sets::hitting_times` is the general tool; detectors use
//! these closed forms instead, which never miss thin hitting intervals.

use std::f64::consts::FRAC_PI_2;

use crate::dynamics::DynamicalSystem;
use crate::element::GroupElement;
use crate::error::{ChaosError, Result};
use crate::open_set::{circle_ball_intersection, circle_ball_preimage, depth_for_radius, merge_patterns, shift_preimage, OpenSet};
use crate::sets::{patterns_hit, Members, TimeWindow, WindowSet};
use crate::space::{arc, wrap_unit, ExtReal, Point, Word};
use crate::systems::CatalogEntry;

/// `N(U, V)` inside the window. Products factor coordinatewise.
pub fn set_hits(system: &DynamicalSystem, u: &OpenSet, v: &OpenSet, window: TimeWindow) -> Result<WindowSet> {
    if system.is_product() {
        let (OpenSet::Product(us), OpenSet::Product(vs)) = (u, v) else {
            return Err(ChaosError::usage("product systems need product open sets"));
        };
        if us.len() != system.arity() || vs.len() != system.arity() {
            return Err(ChaosError::usage("open set arity differs from the product arity"));
        }
        let base = system.base();
        let mut acc: Option<WindowSet> = None;
        for (a, b) in us.iter().zip(vs) {
            let h = set_hits(&base, a, b, window)?;
            acc = Some(match acc {
                None => h,
                Some(prev) => intersect(&prev, &h),
            });
        }
        return Ok(acc.expect("arity at least 2"));
    }
    match system.entry() {
        CatalogEntry::FullShift { length, .. } => {
            let pu = as_pattern(u)?;
            let pv = as_pattern(v)?;
            let lo = window.lo.ceil().max(0.0) as i64;
            let hi = (window.hi.floor() as i64).min(*length as i64 - pv.len() as i64);
            let hits = (lo..=hi).filter(|&n| patterns_hit(&pu, &pv, n as usize));
            Ok(WindowSet::integers(window, hits))
        }
        CatalogEntry::TranslationFlow => {
            let (cu, ru) = ball_of(u)?;
            let (cv, rv) = ball_of(v)?;
            let (iu, inf_u) = real_parts(cu, ru);
            let (iv, inf_v) = real_parts(cv, rv);
            if inf_u && inf_v {
                return Ok(WindowSet::intervals(window, [(window.lo, window.hi)]));
            }
            let mut out = Vec::new();
            for (a, b) in &iu {
                for (c, d) in &iv {
                    let (lo, hi) = (c - b, d - a);
                    let pad = 1e-9 * (1.0 + lo.abs().min(hi.abs()).min(1e12));
                    if hi - lo > 2.0 * pad {
                        out.push((lo + pad, hi - pad));
                    }
                }
            }
            Ok(WindowSet::intervals(window, out))
        }
        CatalogEntry::IntegerTranslation => {
            let (cu, ru) = ball_of(u)?;
            let (cv, rv) = ball_of(v)?;
            let (iu, inf_u) = real_parts(cu, ru);
            let (iv, inf_v) = real_parts(cv, rv);
            let range = window.int_range();
            if inf_u && inf_v {
                return Ok(WindowSet::integers(window, range));
            }
            let ju: Vec<(i64, i64)> = iu.iter().filter_map(|c| int_part(*c)).collect();
            let jv: Vec<(i64, i64)> = iv.iter().filter_map(|c| int_part(*c)).collect();
            let hits = range.filter(|t| {
                ju.iter()
                    .any(|(a, b)| jv.iter().any(|(c, d)| c.saturating_sub(*b) <= *t && *t <= d.saturating_sub(*a)))
            });
            Ok(WindowSet::integers(window, hits))
        }
        CatalogEntry::CircleRotation { alpha } => {
            let (cu, ru) = circle_ball(u)?;
            let (cv, rv) = circle_ball(v)?;
            let hits = window
                .int_range()
                .filter(|&n| arc(wrap_unit(cu + wrap_unit(n as f64 * alpha)), cv) < ru + rv);
            Ok(WindowSet::integers(window, hits))
        }
        CatalogEntry::Mobius => Err(ChaosError::usage(
            "matrix-time hitting sets are not enumerated; the detectors use the two-point solver",
        )),
        CatalogEntry::TwoCircle => Err(ChaosError::usage(
            "two-circle hitting elements are constructed, not enumerated",
        )),
    }
}

/// `N(x, V)` inside the window.
pub fn point_hits(system: &DynamicalSystem, x: &Point, v: &OpenSet, window: TimeWindow) -> Result<WindowSet> {
    if system.is_product() {
        let (Point::Tuple(xs), OpenSet::Product(vs)) = (x, v) else {
            return Err(ChaosError::usage("product systems need tuples and product open sets"));
        };
        let base = system.base();
        let mut acc: Option<WindowSet> = None;
        for (p, b) in xs.iter().zip(vs) {
            let h = point_hits(&base, p, b, window)?;
            acc = Some(match acc {
                None => h,
                Some(prev) => intersect(&prev, &h),
            });
        }
        return acc.ok_or_else(|| ChaosError::usage("empty tuple"));
    }
    match system.entry() {
        CatalogEntry::TranslationFlow => {
            let (cv, rv) = ball_of(v)?;
            let (iv, inf_v) = real_parts(cv, rv);
            let out: Vec<(f64, f64)> = match x.as_ext_real() {
                Some(ExtReal::Infinity) => {
                    if inf_v {
                        vec![(window.lo, window.hi)]
                    } else {
                        Vec::new()
                    }
                }
                Some(ExtReal::Finite(a)) => iv
                    .iter()
                    .filter_map(|(c, d)| {
                        let (lo, hi) = (c - a, d - a);
                        let pad = 1e-9 * (1.0 + lo.abs().min(hi.abs()).min(1e12));
                        (hi - lo > 2.0 * pad).then_some((lo + pad, hi - pad))
                    })
                    .collect(),
                None => return Err(ChaosError::usage("expected an extended real")),
            };
            Ok(WindowSet::intervals(window, out))
        }
        CatalogEntry::FullShift { length, .. } => {
            let pv = as_pattern(v)?;
            let w = x.as_word().ok_or_else(|| ChaosError::usage("expected a word"))?;
            let lo = window.lo.ceil().max(0.0) as i64;
            let hi = (window.hi.floor() as i64).min(w.len().min(*length) as i64 - pv.len() as i64);
            let hits = (lo..=hi).filter(|&n| {
                pv.iter().enumerate().all(|(i, s)| match s {
                    Some(a) => w.symbols[n as usize + i] == *a,
                    None => true,
                })
            });
            Ok(WindowSet::integers(window, hits))
        }
        CatalogEntry::IntegerTranslation | CatalogEntry::CircleRotation { .. } => {
            let mut hits = Vec::new();
            for n in window.int_range() {
                let y = system.act(&GroupElement::IntTime(n), x)?;
                if v.contains(system, &y)? {
                    hits.push(n);
                }
            }
            Ok(WindowSet::integers(window, hits))
        }
        CatalogEntry::Mobius | CatalogEntry::TwoCircle => Err(ChaosError::usage(
            "point hitting sets are only enumerated for time-parameterized systems",
        )),
    }
}

/// A point `x ∈ U` with `t·x ∈ V`, confirmed by acting; `None` if no
/// confirmed point is found.
pub fn hit_witness(system: &DynamicalSystem, u: &OpenSet, v: &OpenSet, t: &GroupElement) -> Result<Option<Point>> {
    let candidate = if system.is_product() {
        let (OpenSet::Product(us), OpenSet::Product(vs)) = (u, v) else {
            return Err(ChaosError::usage("product systems need product open sets"));
        };
        let base = system.base();
        let mut comps = Vec::new();
        for (a, b) in us.iter().zip(vs) {
            match hit_witness(&base, a, b, t.base())? {
                Some(p) => comps.push(p),
                None => return Ok(None),
            }
        }
        Some(Point::Tuple(comps))
    } else {
        base_candidate(system, u, v, t)?
    };
    match candidate {
        Some(x) if u.contains(system, &x)? && v.contains(system, &system.act(t, &x)?)? => Ok(Some(x)),
        _ => Ok(None),
    }
}

fn base_candidate(system: &DynamicalSystem, u: &OpenSet, v: &OpenSet, t: &GroupElement) -> Result<Option<Point>> {
    match (system.entry(), t) {
        (CatalogEntry::FullShift { alphabet, length }, GroupElement::IntTime(n)) if *n >= 0 => {
            let pu = as_pattern(u)?;
            let pv = as_pattern(v)?;
            let Some(m) = merge_patterns(&pu, &shift_preimage(&pv, *n as usize)) else {
                return Ok(None);
            };
            if m.len() > *length {
                return Ok(None);
            }
            let symbols = (0..*length).map(|i| m.get(i).copied().flatten().unwrap_or(0)).collect();
            Ok(Some(Point::Word(Word::new(*alphabet, symbols)?)))
        }
        (CatalogEntry::TranslationFlow, GroupElement::RealTime(s)) => Ok(real_overlap(u, v, *s)?),
        (CatalogEntry::IntegerTranslation, GroupElement::IntTime(n)) => {
            Ok(real_overlap(u, v, *n as f64)?.map(|p| match p {
                Point::ProjReal(ExtReal::Finite(x)) => Point::real(x.round()),
                other => other,
            }))
        }
        (CatalogEntry::CircleRotation { alpha }, GroupElement::IntTime(n)) => {
            let turn = wrap_unit(*n as f64 * alpha);
            let mut cands = Vec::new();
            if let Some(pre) = circle_ball_preimage(v, turn) {
                if let Some(OpenSet::Ball { center, .. }) = circle_ball_intersection(u, &pre) {
                    cands.push(center);
                }
                if let OpenSet::Ball { center, .. } = pre {
                    cands.push(center);
                }
            }
            if let OpenSet::Ball { center, .. } = u {
                cands.push(center.clone());
            }
            // wide balls: the arc intersection is not a ball
            cands.extend(u.samples(system, 8)?);
            for c in cands {
                if u.contains(system, &c)? && v.contains(system, &system.act(t, &c)?)? {
                    return Ok(Some(c));
                }
            }
            Ok(None)
        }
        _ => Ok(None),
    }
}

fn real_overlap(u: &OpenSet, v: &OpenSet, s: f64) -> Result<Option<Point>> {
    let (cu, ru) = ball_of(u)?;
    let (cv, rv) = ball_of(v)?;
    let (iu, inf_u) = real_parts(cu, ru);
    let (iv, inf_v) = real_parts(cv, rv);
    for (a, b) in &iu {
        for (c, d) in &iv {
            let lo = a.max(c - s);
            let hi = b.min(d - s);
            if lo < hi {
                let x = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => (lo + hi) / 2.0,
                    (true, false) => lo + 1.0,
                    (false, true) => hi - 1.0,
                    (false, false) => 0.0,
                };
                return Ok(Some(Point::real(x)));
            }
        }
    }
    Ok((inf_u && inf_v).then(Point::infinity))
}

fn ball_of(u: &OpenSet) -> Result<(ExtReal, f64)> {
    match u {
        OpenSet::Ball { center, radius } => center
            .as_ext_real()
            .map(|c| (c, *radius))
            .ok_or_else(|| ChaosError::usage("ball center is not an extended real")),
        _ => Err(ChaosError::usage(format!("{u} is not a metric ball"))),
    }
}

fn circle_ball(u: &OpenSet) -> Result<(f64, f64)> {
    match u {
        OpenSet::Ball { center: Point::Circle(c), radius } => Ok((*c, *radius)),
        _ => Err(ChaosError::usage(format!("{u} is not a circle ball"))),
    }
}

/// Cylinder pattern of a shift open set.
pub(crate) fn as_pattern(u: &OpenSet) -> Result<Vec<Option<u8>>> {
    match u {
        OpenSet::Pattern(p) => Ok(p.clone()),
        OpenSet::Ball { center: Point::Word(w), radius } => {
            let m = depth_for_radius(*radius).min(w.len());
            Ok(w.symbols[..m].iter().map(|&s| Some(s)).collect())
        }
        _ => Err(ChaosError::usage(format!("{u} is not a shift open set"))),
    }
}

/// Real points of the chordal ball `B(c, r)` as at most two open intervals,
/// and whether `∞` lies inside.
pub(crate) fn real_parts(c: ExtReal, r: f64) -> (Vec<(f64, f64)>, bool) {
    let inf = f64::INFINITY;
    if r > 1.0 {
        return (vec![(-inf, inf)], true);
    }
    let phi = c.angle();
    if r == 1.0 {
        // everything except the antipode
        return match ExtReal::from_angle(phi + FRAC_PI_2) {
            ExtReal::Infinity => (vec![(-inf, inf)], false),
            ExtReal::Finite(a) => (vec![(-inf, a), (a, inf)], true),
        };
    }
    let h = r.asin();
    // put the arc start in [-π/2, π/2)
    let mut lo = phi - h;
    while lo >= FRAC_PI_2 {
        lo -= std::f64::consts::PI;
    }
    while lo < -FRAC_PI_2 {
        lo += std::f64::consts::PI;
    }
    let hi = lo + 2.0 * h;
    let tan_lo = if lo <= -FRAC_PI_2 { -inf } else { lo.tan() };
    if hi <= FRAC_PI_2 {
        (vec![(tan_lo, hi.tan())], false)
    } else {
        let wrapped = hi - std::f64::consts::PI;
        (vec![(tan_lo, inf), (-inf, wrapped.tan())], true)
    }
}

/// Integers of an open interval as a closed range.
fn int_part((a, b): (f64, f64)) -> Option<(i64, i64)> {
    let lo = if a.is_finite() { a.floor() as i64 + 1 } else { i64::MIN / 4 };
    let hi = if b.is_finite() { b.ceil() as i64 - 1 } else { i64::MAX / 4 };
    (lo <= hi).then_some((lo, hi))
}

pub(crate) fn intersect(a: &WindowSet, b: &WindowSet) -> WindowSet {
    match (&a.members, &b.members) {
        (Members::Integers(_), Members::Integers(_)) => WindowSet::integers(a.window, a.intersect_integers(b)),
        (Members::Intervals(x), Members::Intervals(y)) => {
            let mut out = Vec::new();
            for (p, q) in x {
                for (r, s) in y {
                    let lo = p.max(*r);
                    let hi = q.min(*s);
                    if lo <= hi {
                        out.push((lo, hi));
                    }
                }
            }
            WindowSet::intervals(a.window, out)
        }
        _ => WindowSet {
            kind: a.kind,
            window: a.window,
            members: Members::Integers(Vec::new()),
        },
    }
}

/// Picks a hit time inside a hitting set, preferring small `|t|`.
pub(crate) fn pick_time(system: &DynamicalSystem, set: &WindowSet) -> Option<GroupElement> {
    let kind = system.element_kind();
    let elem = |t: f64| match kind {
        crate::element::ElementKind::IntTime => GroupElement::IntTime(t as i64),
        _ => GroupElement::RealTime(t),
    };
    let wrap = |g: GroupElement| {
        if system.is_product() {
            GroupElement::TupleTime(Box::new(g))
        } else {
            g
        }
    };
    match &set.members {
        Members::Integers(v) => v.iter().min_by_key(|t| t.abs()).map(|&t| wrap(elem(t as f64))),
        Members::Intervals(v) => v
            .iter()
            .map(|(a, b)| if *a <= 0.0 && *b >= 0.0 { 0.0 } else if a.abs() < b.abs() { *a } else { *b })
            .min_by(|x, y| x.abs().total_cmp(&y.abs()))
            .map(|t| wrap(elem(t))),
        Members::Circle(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::chordal;
    use crate::systems::build_system;

    #[test]
    fn chordal_ball_intervals_match_distance() {
        for (c, r) in [(ExtReal::Finite(0.0), 0.5), (ExtReal::Infinity, 0.1), (ExtReal::Finite(2.4), 0.05), (ExtReal::Finite(-3.0), 0.9)] {
            let (parts, inf) = real_parts(c, r);
            assert_eq!(inf, chordal(c, ExtReal::Infinity) < r);
            for k in -400..=400 {
                let x = k as f64 * 0.173;
                let inside = parts.iter().any(|(a, b)| *a < x && x < *b);
                let d = chordal(c, ExtReal::Finite(x));
                if (d - r).abs() > 1e-9 {
                    assert_eq!(inside, d < r, "c={c} r={r} x={x}");
                }
            }
        }
    }

    #[test]
    fn flow_hits_have_witnesses() {
        let flow = build_system(CatalogEntry::TranslationFlow).unwrap();
        let w = TimeWindow { lo: -100.0, hi: 100.0 };
        let u = OpenSet::ball(Point::infinity(), 0.01);
        let v = OpenSet::ball(Point::real(0.0), 0.01);
        let h = set_hits(&flow, &u, &v, w).unwrap();
        let t = pick_time(&flow, &h).unwrap();
        assert!(hit_witness(&flow, &u, &v, &t).unwrap().is_some());
        let fwd = TimeWindow { lo: 0.0, hi: 100.0 };
        let u = OpenSet::ball(Point::real(1.0), 0.01);
        assert!(set_hits(&flow, &u, &v, fwd).unwrap().is_empty());
    }

    #[test]
    fn integer_and_rotation_hits() {
        let z = build_system(CatalogEntry::IntegerTranslation).unwrap();
        let w = TimeWindow { lo: -10.0, hi: 10.0 };
        let h = set_hits(&z, &OpenSet::ball(Point::real(0.0), 0.1), &OpenSet::ball(Point::real(3.0), 0.01), w).unwrap();
        assert_eq!(h.as_integers().unwrap(), &[3]);
        let rot = build_system(CatalogEntry::CircleRotation { alpha: 0.25 }).unwrap();
        let h = set_hits(&rot, &OpenSet::ball(Point::circle(0.0), 0.05), &OpenSet::ball(Point::circle(0.5), 0.05), w).unwrap();
        assert_eq!(h.as_integers().unwrap(), &[-10, -6, -2, 2, 6, 10]);
        for &n in h.as_integers().unwrap() {
            let x = hit_witness(
                &rot,
                &OpenSet::ball(Point::circle(0.0), 0.05),
                &OpenSet::ball(Point::circle(0.5), 0.05),
                &GroupElement::IntTime(n),
            )
            .unwrap();
            assert!(x.is_some());
        }
    }
}
