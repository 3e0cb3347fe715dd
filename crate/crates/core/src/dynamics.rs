//! Dynamical systems `(T, X, π)`: action evaluation, orbits, finite
//! products and the supremum metric `d_T`.

use serde::{Deserialize, Serialize};

use crate::element::{ElementKind, GroupElement};
use crate::error::{ChaosError, Result};
use crate::space::{Point, SpaceKind};
use crate::systems::{self, CatalogEntry};

/// Tolerance for the composition law on float-valued systems.
pub const COMPOSITION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicalSystem {
    entry: CatalogEntry,
    /// 1 for a catalog system, `k` for its `k`-fold diagonal product.
    arity: usize,
}

impl DynamicalSystem {
    pub(crate) fn from_entry(entry: CatalogEntry) -> DynamicalSystem {
        DynamicalSystem { entry, arity: 1 }
    }

    pub fn entry(&self) -> &CatalogEntry {
        &self.entry
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_product(&self) -> bool {
        self.arity > 1
    }

    /// The factor system of a product (the system itself otherwise).
    pub fn base(&self) -> DynamicalSystem {
        DynamicalSystem::from_entry(self.entry.clone())
    }

    pub fn name(&self) -> String {
        if self.arity > 1 {
            format!("{}^{}", self.entry.name(), self.arity)
        } else {
            self.entry.name()
        }
    }

    pub fn space(&self) -> SpaceKind {
        let base = self.entry.space();
        if self.arity > 1 {
            SpaceKind::Product {
                inner: Box::new(base),
                arity: self.arity,
            }
        } else {
            base
        }
    }

    pub fn element_kind(&self) -> ElementKind {
        self.entry.element_kind()
    }

    /// Acting set is a group (otherwise a monoid of nonnegative times).
    pub fn is_group(&self) -> bool {
        self.entry.is_group()
    }

    pub fn monoid_identity(&self) -> Option<GroupElement> {
        Some(GroupElement::identity(self.element_kind()))
    }

    pub fn is_metric(&self) -> bool {
        self.space().is_metric()
    }

    pub fn require_metric(&self) -> Result<()> {
        if self.is_metric() {
            Ok(())
        } else {
            Err(ChaosError::UnsupportedMetric("two_circle"))
        }
    }

    pub fn check_element(&self, t: &GroupElement) -> Result<()> {
        if matches!(t, GroupElement::TupleTime(_)) && self.arity == 1 {
            return Err(ChaosError::usage("product element used on a non-product system"));
        }
        if t.kind() != self.element_kind() {
            return Err(ChaosError::usage(format!(
                "element {t} is {}, system {} acts by {}",
                t.kind().name(),
                self.name(),
                self.element_kind().name()
            )));
        }
        Ok(())
    }

    /// `π(t, p)`.
    pub fn act(&self, t: &GroupElement, p: &Point) -> Result<Point> {
        self.check_element(t)?;
        if self.arity > 1 {
            let comps = match p {
                Point::Tuple(c) if c.len() == self.arity => c,
                _ => {
                    return Err(ChaosError::usage(format!(
                        "point {p} is not a {}-tuple",
                        self.arity
                    )))
                }
            };
            let t = t.base();
            let moved = comps
                .iter()
                .map(|q| systems::act_base(&self.entry, t, q))
                .collect::<Result<Vec<_>>>()?;
            Ok(Point::Tuple(moved))
        } else {
            systems::act_base(&self.entry, t.base(), p)
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.space().distance(p, q)
    }
}

pub fn metric_distance(system: &DynamicalSystem, p: &Point, q: &Point) -> Result<f64> {
    let space = system.space();
    space.check(p)?;
    space.check(q)?;
    space.distance(p, q)
}

pub fn act(system: &DynamicalSystem, t: &GroupElement, p: &Point) -> Result<Point> {
    system.act(t, p)
}

/// Applies every element of `schedule` to `p`, preserving order.
pub fn orbit_trace(
    system: &DynamicalSystem,
    p: &Point,
    schedule: &[GroupElement],
) -> Result<Vec<Point>> {
    if schedule.is_empty() {
        return Err(ChaosError::usage("orbit schedule is empty"));
    }
    schedule
        .iter()
        .enumerate()
        .map(|(index, t)| {
            system.act(t, p).map_err(|e| ChaosError::Schedule {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// The `k`-fold product with the diagonal action and the max metric.
pub fn product_system(system: &DynamicalSystem, k: usize) -> Result<DynamicalSystem> {
    if k < 2 {
        return Err(ChaosError::usage("product arity must be at least 2"));
    }
    if system.is_product() {
        return Err(ChaosError::usage("products are formed from catalog systems only"));
    }
    Ok(DynamicalSystem {
        entry: system.entry.clone(),
        arity: k,
    })
}

/// `max_{t ∈ schedule} d(t·p, t·q)`, a lower bound for `d_T(p, q)`.
pub fn sup_metric_estimate(
    system: &DynamicalSystem,
    p: &Point,
    q: &Point,
    schedule: &[GroupElement],
) -> Result<f64> {
    system.require_metric()?;
    if schedule.is_empty() {
        return Err(ChaosError::usage("schedule is empty"));
    }
    let mut best = 0.0f64;
    for (index, t) in schedule.iter().enumerate() {
        let wrap = |e| ChaosError::Schedule {
            index,
            source: Box::new(e),
        };
        let a = system.act(t, p).map_err(wrap)?;
        let b = system.act(t, q).map_err(wrap)?;
        best = best.max(system.distance(&a, &b)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Mat2;
    use crate::space::{ExtReal, Word};
    use crate::systems::build_system;

    #[test]
    fn translation_and_mobius_examples() {
        let flow = build_system(CatalogEntry::TranslationFlow).unwrap();
        assert_eq!(
            act(&flow, &GroupElement::RealTime(3.0), &Point::real(2.0)).unwrap(),
            Point::real(5.0)
        );
        let mobius = build_system(CatalogEntry::Mobius).unwrap();
        let m = Mat2::new(2.0, 3.0, 1.0, 2.0).unwrap();
        assert_eq!(
            act(&mobius, &GroupElement::Mat2(m), &Point::infinity()).unwrap(),
            Point::real(2.0)
        );
        let t2 = GroupElement::Mat2(Mat2::contracting(2.0));
        let v = act(&mobius, &t2, &Point::real(1.0)).unwrap();
        let x = v.as_ext_real().unwrap().finite().unwrap();
        assert!((x - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn orbit_examples() {
        let flow = build_system(CatalogEntry::TranslationFlow).unwrap();
        let sched: Vec<_> = [1.0, 2.0, 3.0].map(GroupElement::RealTime).into();
        let orbit = orbit_trace(&flow, &Point::real(0.0), &sched).unwrap();
        assert_eq!(orbit, vec![Point::real(1.0), Point::real(2.0), Point::real(3.0)]);

        let mobius = build_system(CatalogEntry::Mobius).unwrap();
        let sched: Vec<_> = (1..=3)
            .map(|n| GroupElement::Mat2(Mat2::contracting(f64::from(n))))
            .collect();
        for p in orbit_trace(&mobius, &Point::real(0.0), &sched).unwrap() {
            assert_eq!(p, Point::real(0.0));
        }

        let shift = build_system(CatalogEntry::FullShift {
            alphabet: 2,
            length: 8,
        })
        .unwrap();
        let w = Point::Word(Word::periodic(2, &[0, 1], 8).unwrap());
        let out = orbit_trace(&shift, &w, &[GroupElement::IntTime(2)]).unwrap();
        assert_eq!(out, vec![Point::Word(Word::periodic(2, &[0, 1], 6).unwrap())]);
    }

    #[test]
    fn orbit_errors_carry_index() {
        let shift = build_system(CatalogEntry::FullShift {
            alphabet: 2,
            length: 8,
        })
        .unwrap();
        let w = Point::Word(Word::zeros(2, 8));
        let err = orbit_trace(
            &shift,
            &w,
            &[GroupElement::IntTime(1), GroupElement::IntTime(8)],
        )
        .unwrap_err();
        assert!(matches!(err, ChaosError::Schedule { index: 1, .. }));
        assert!(orbit_trace(&shift, &w, &[]).is_err());
    }

    #[test]
    fn products_act_diagonally() {
        let rot = build_system(CatalogEntry::CircleRotation { alpha: 0.25 }).unwrap();
        let p2 = product_system(&rot, 2).unwrap();
        let out = p2
            .act(
                &GroupElement::IntTime(1),
                &Point::Tuple(vec![Point::circle(0.0), Point::circle(0.5)]),
            )
            .unwrap();
        assert_eq!(out, Point::Tuple(vec![Point::circle(0.25), Point::circle(0.75)]));
        let d = p2
            .distance(
                &Point::Tuple(vec![Point::circle(0.0), Point::circle(0.0)]),
                &Point::Tuple(vec![Point::circle(0.5), Point::circle(0.0)]),
            )
            .unwrap();
        assert_eq!(d, 0.5);
        assert!(product_system(&rot, 1).is_err());
        assert!(product_system(&p2, 2).is_err());

        let shift = build_system(CatalogEntry::FullShift {
            alphabet: 2,
            length: 8,
        })
        .unwrap();
        let p3 = product_system(&shift, 3).unwrap();
        let w = Point::Word(Word::periodic(2, &[0, 1, 1], 8).unwrap());
        let out = p3
            .act(
                &GroupElement::TupleTime(Box::new(GroupElement::IntTime(2))),
                &Point::Tuple(vec![w.clone(), w.clone(), w]),
            )
            .unwrap();
        for c in out.components().unwrap() {
            assert_eq!(c.as_word().unwrap().len(), 6);
        }
    }

    #[test]
    fn sup_metric_examples() {
        let flow = build_system(CatalogEntry::TranslationFlow).unwrap();
        let d = sup_metric_estimate(
            &flow,
            &Point::real(0.0),
            &Point::real(1.0),
            &[GroupElement::RealTime(0.0)],
        )
        .unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let shift = build_system(CatalogEntry::FullShift {
            alphabet: 2,
            length: 16,
        })
        .unwrap();
        let a = Point::Word(Word::parse(2, "0010", 16).unwrap());
        let b = Point::Word(Word::parse(2, "0011", 16).unwrap());
        let sched: Vec<_> = (0..4).map(GroupElement::IntTime).collect();
        assert_eq!(sup_metric_estimate(&shift, &a, &b, &sched).unwrap(), 1.0);
        assert_eq!(
            metric_distance(&flow, &Point::real(0.0), &Point::infinity()).unwrap(),
            1.0
        );
        let tc = build_system(CatalogEntry::TwoCircle).unwrap();
        assert!(matches!(
            sup_metric_estimate(&tc, &Point::infinity(), &Point::infinity(), &[]),
            Err(ChaosError::UnsupportedMetric(_))
        ));
        let _ = ExtReal::Infinity;
    }
}
