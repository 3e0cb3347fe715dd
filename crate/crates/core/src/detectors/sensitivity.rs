//! Sensitive dependence on initial conditions.

use num_rational::BigRational;

use super::{basis_radius, distance_bounds, echo_resolution, grid_points, time_grid, Resolution};
use crate::certificate::{Certificate, Verdict, Witness};
use crate::dynamics::DynamicalSystem;
use crate::element::{GroupElement, Mat2};
use crate::error::Result;
use crate::open_set::OpenSet;
use crate::qsqrt2::QSqrt2;
use crate::space::{ExtReal, Point, TwoCirclePoint};
use crate::systems::{mobius_two_point, CatalogEntry, FocusedEntourage};

/// Candidate elements separating `x` from `y`.
///
/// Matrix time normalizes the pair to `(0, 1)` and then applies the
/// stretching family `s_m`; other kinds use the window grid.
pub(crate) fn separating_candidates(
    system: &DynamicalSystem,
    x: &Point,
    y: &Point,
    grid: &[GroupElement],
) -> Result<Vec<GroupElement>> {
    if let CatalogEntry::Mobius = system.entry() {
        let (Some(a), Some(b)) = (x.as_ext_real(), y.as_ext_real()) else {
            return Ok(Vec::new());
        };
        if a == b {
            return Ok(Vec::new());
        }
        let g = normalizer(a, b)?;
        return Ok([1.0, 2.0, 5.0, 10.0, 50.0, 100.0]
            .iter()
            .map(|&m| GroupElement::Mat2(Mat2::separating(m).mul(&g)))
            .collect());
    }
    Ok(grid.to_vec())
}

/// `g` with `g·a = 0` and `g·b = 1`; the identity when that already holds.
pub(crate) fn normalizer(a: ExtReal, b: ExtReal) -> Result<Mat2> {
    if a == ExtReal::Finite(0.0) && b == ExtReal::Finite(1.0) {
        return Ok(Mat2::IDENTITY);
    }
    mobius_two_point(a, b, ExtReal::Finite(0.0), ExtReal::Finite(1.0))
}

/// Evenly thinned copy of `v` with at most `cap` entries.
pub(crate) fn thin<T: Clone>(v: &[T], cap: usize) -> Vec<T> {
    if v.len() <= cap {
        return v.to_vec();
    }
    let step = v.len() as f64 / cap as f64;
    (0..cap).map(|i| v[(i as f64 * step) as usize].clone()).collect()
}

pub fn detect_sensitivity(system: &DynamicalSystem, res: &Resolution) -> Result<Certificate> {
    res.validate()?;
    if let CatalogEntry::TwoCircle = system.entry() {
        return two_circle_sensitivity(system, res);
    }
    system.require_metric()?;
    let space = system.space();
    let full = time_grid(system, res);
    let grid = thin(&full, res.max_steps);
    let pts = grid_points(system, res)?;
    let mut witnesses = Vec::new();
    let mut weakest = f64::INFINITY;
    for x in &pts {
        for &delta in &res.epsilon_grid {
            let ball = OpenSet::ball(x.clone(), delta);
            let mut best: Option<(f64, Point, GroupElement)> = None;
            for y in ball.samples(system, 8)? {
                if y == *x {
                    continue;
                }
                for t in separating_candidates(system, x, &y, &grid)? {
                    let (lo, _) = distance_bounds(&space, &system.act(&t, x)?, &system.act(&t, &y)?)?;
                    if best.as_ref().map_or(true, |b| lo > b.0) {
                        best = Some((lo, y.clone(), t));
                    }
                }
            }
            let (d, y, t) = match best {
                Some(b) => b,
                None => (0.0, x.clone(), GroupElement::identity(system.element_kind())),
            };
            weakest = weakest.min(d);
            witnesses.push(
                Witness::new("separation")
                    .element(t)
                    .points([x.clone(), y])
                    .distance(d)
                    .label(format!("delta={delta}")),
            );
        }
    }
    if let Some(eps) = res.largest_below(weakest) {
        return Ok(Certificate::new(system.name(), "sensitivity", Verdict::Verified)
            .param("sensitivity_constant", eps)
            .param("min_separation", weakest)
            .witnesses(witnesses)
            .note("every grid point has, for every grid delta, a delta-close point later separated by more than the constant")
            .with_resolution(&echo_resolution(res))
            .with_seed(res.seed));
    }
    // equicontinuity evidence over the whole window
    let eps = res.eps_min();
    let mut deltas = res.epsilon_grid.clone();
    deltas.extend([eps / 2.0, eps / 4.0]);
    let mut equi = Vec::new();
    for x in &pts {
        for &delta in &deltas {
            let ball = OpenSet::ball(x.clone(), delta);
            let mut sup = 0.0f64;
            for y in ball.samples(system, 8)? {
                for t in &full {
                    let (_, hi) = distance_bounds(&space, &system.act(t, x)?, &system.act(t, &y)?)?;
                    sup = sup.max(hi);
                    if sup > eps {
                        break;
                    }
                }
                if sup > eps {
                    break;
                }
            }
            if sup <= eps {
                equi.push(
                    Witness::new("equicontinuity")
                        .point(x.clone())
                        .distance(sup)
                        .label(format!("delta={delta}")),
                );
                break;
            }
        }
    }
    let cert = if equi.is_empty() {
        Certificate::new(system.name(), "sensitivity", Verdict::Inconclusive)
            .param("min_separation", weakest)
            .witnesses(witnesses)
            .note("no grid constant separates every grid point, and no equicontinuity point was found; limiting parameter: epsilon_grid")
    } else {
        let n = equi.len();
        Certificate::new(system.name(), "sensitivity", Verdict::Refuted)
            .param("min_separation", weakest)
            .param("equicontinuity_points", n)
            .witnesses(equi)
            .note(format!("{n} of {} grid points are equicontinuous over the full window", pts.len()))
    };
    Ok(cert.with_resolution(&echo_resolution(res)).with_seed(res.seed))
}

/// The basis version: with the focused entourage (focus 0, cap 1/4) every
/// basis neighbourhood of every grid point holds a point that the action
/// carries to a pair straddling the focus.
fn two_circle_sensitivity(system: &DynamicalSystem, res: &Resolution) -> Result<Certificate> {
    let quarter = BigRational::new(1.into(), 4.into());
    let alpha = FocusedEntourage::new(QSqrt2::zero(), quarter)?;
    let half = BigRational::new(1.into(), 2.into());
    let mut cert = Certificate::new(system.name(), "sensitivity", Verdict::Verified)
        .param("entourage", &alpha)
        .note("uniform-space version: escape from a neighbourhood of the diagonal whose radius shrinks towards the focus");
    for x in grid_points(system, res)? {
        let p = x.as_two_circle().cloned().expect("two-circle grid");
        for &delta in &res.epsilon_grid {
            let Some(r) = basis_radius(delta) else { continue };
            let r = QSqrt2::rational(r * half.clone());
            let quarter_r = r.scale(&half);
            let (x2, t) = if p.level == 0 {
                (
                    TwoCirclePoint::new(&p.angle + &r, 1)?,
                    -(&p.angle + &quarter_r),
                )
            } else {
                (
                    TwoCirclePoint::new(&p.angle - &r, 0)?,
                    -(&p.angle - &quarter_r),
                )
            };
            let t = GroupElement::circle(t);
            let a = system.act(&t, &x)?;
            let b = system.act(&t, &Point::TwoCircle(x2.clone()))?;
            let (Point::TwoCircle(pa), Point::TwoCircle(pb)) = (&a, &b) else { unreachable!() };
            if alpha.contains(pa, pb) {
                cert.verdict = Verdict::Inconclusive;
                cert = cert.note(format!("construction failed at {p} delta={delta}"));
                continue;
            }
            cert = cert.witness(
                Witness::new("escape")
                    .element(t)
                    .points([x.clone(), Point::TwoCircle(x2), a, b])
                    .label(format!("delta={delta}")),
            );
        }
    }
    Ok(cert.with_resolution(&echo_resolution(res)).with_seed(res.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::build_system;

    #[test]
    fn shift_constant_is_half() {
        let shift = build_system(CatalogEntry::FullShift { alphabet: 2, length: 64 }).unwrap();
        let c = detect_sensitivity(&shift, &Resolution::for_system(&shift)).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        assert_eq!(c.parameter_f64("sensitivity_constant"), Some(0.5));
    }

    #[test]
    fn rotation_is_equicontinuous() {
        let rot = build_system(CatalogEntry::CircleRotation { alpha: 0.41421356 }).unwrap();
        let res = Resolution::for_system(&rot);
        let c = detect_sensitivity(&rot, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
        assert_eq!(c.witnesses_of("equicontinuity").count(), grid_points(&rot, &res).unwrap().len());
    }

    #[test]
    fn mobius_and_two_circle_are_sensitive() {
        let m = build_system(CatalogEntry::Mobius).unwrap();
        assert_eq!(detect_sensitivity(&m, &Resolution::for_system(&m)).unwrap().verdict, Verdict::Verified);
        let tc = build_system(CatalogEntry::TwoCircle).unwrap();
        let c = detect_sensitivity(&tc, &Resolution::for_system(&tc)).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        assert_eq!(c.witnesses.len(), 8 * 4);
    }
}
