//! Pointwise classification: periodic, almost periodic, recurrent and
//! transitive points.

use serde::{Deserialize, Serialize};

use super::hits::point_hits;
use super::transitivity::{family, orbit_hit};
use super::{distance_bounds, echo_resolution, time_grid, Resolution};
use crate::certificate::{Certificate, Verdict, Witness};
use crate::dynamics::DynamicalSystem;
use crate::element::{ElementKind, GroupElement, Mat2};
use crate::error::{ChaosError, Result};
use crate::open_set::OpenSet;
use crate::sets::{make_reference_sequence, set_class_check, ClassParams, Compact, RefTemplate, ReferenceSequence, WindowSet};
use crate::space::{same_point, ExtReal, Point, Word};
use crate::systems::{mobius_transport, shift_word, CatalogEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Periodic,
    AlmostPeriodic,
    Recurrent,
    TransitivePoint,
}

impl PointKind {
    pub fn name(self) -> &'static str {
        match self {
            PointKind::Periodic => "periodic",
            PointKind::AlmostPeriodic => "almost_periodic",
            PointKind::Recurrent => "recurrent",
            PointKind::TransitivePoint => "transitive_point",
        }
    }
}

/// Symmetric intervals for group time, forward intervals for the shift,
/// norm balls for matrices.
pub fn default_refseq(system: &DynamicalSystem) -> Result<ReferenceSequence> {
    let kind = system.element_kind();
    let template = match kind {
        ElementKind::Mat2 => RefTemplate::MatrixNormBall,
        _ if !system.is_group() => RefTemplate::ForwardInterval,
        ElementKind::CircleExact => {
            return Err(ChaosError::usage("circle-element reference sequences must be explicit"))
        }
        _ => RefTemplate::SymmetricInterval,
    };
    make_reference_sequence(kind, template)
}

/// Concatenation of all words in length-lexicographic order, cut at `len`.
pub fn transitive_word(alphabet: u8, len: usize) -> Word {
    let mut out = Vec::with_capacity(len);
    let mut k = 1u32;
    while out.len() < len {
        let a = alphabet as usize;
        for code in 0..a.pow(k) {
            let mut c = code;
            let mut w = vec![0u8; k as usize];
            for i in (0..k as usize).rev() {
                w[i] = (c % a) as u8;
                c /= a;
            }
            out.extend(w);
            if out.len() >= len {
                break;
            }
        }
        k += 1;
    }
    out.truncate(len);
    Word { alphabet, symbols: out }
}

pub fn classify_point(system: &DynamicalSystem, p: &Point, kind: PointKind, res: &Resolution) -> Result<Certificate> {
    let refseq = if kind == PointKind::Recurrent {
        Some(default_refseq(system)?)
    } else {
        None
    };
    classify_point_with(system, p, kind, refseq.as_ref(), res)
}

pub fn classify_point_with(
    system: &DynamicalSystem,
    p: &Point,
    kind: PointKind,
    refseq: Option<&ReferenceSequence>,
    res: &Resolution,
) -> Result<Certificate> {
    res.validate()?;
    system.space().check(p)?;
    if kind != PointKind::TransitivePoint {
        system.require_metric()?;
    }
    let cert = match kind {
        PointKind::Periodic => periodic(system, p, res)?,
        PointKind::AlmostPeriodic => almost_periodic(system, p, res)?,
        PointKind::Recurrent => {
            let owned;
            let refseq = match refseq {
                Some(r) => r,
                None => {
                    owned = default_refseq(system)?;
                    &owned
                }
            };
            recurrent(system, p, refseq, res)?
        }
        PointKind::TransitivePoint => transitive_point(system, p, res)?,
    };
    Ok(cert
        .param("point", p.to_string())
        .with_resolution(&echo_resolution(res))
        .with_seed(res.seed))
}

fn bound_compact(system: &DynamicalSystem, b: f64) -> Compact {
    match system.element_kind() {
        ElementKind::IntTime => Compact::Finite((0..=b.floor().max(0.0) as i64).collect()),
        _ => Compact::Interval(0.0, b),
    }
}

fn periodic(system: &DynamicalSystem, p: &Point, res: &Resolution) -> Result<Certificate> {
    if system.element_kind() == ElementKind::Mat2 {
        return Err(ChaosError::usage("periodicity is not decided for matrix time"));
    }
    let space = system.space();
    let (window, set) = match system.entry() {
        CatalogEntry::FullShift { .. } => {
            let w = p.as_word().ok_or_else(|| ChaosError::usage("expected a word"))?;
            // compare on a common length of at least half the word
            let hi = (w.len() / 2) as i64;
            let window = crate::sets::TimeWindow::new(0.0, hi as f64)?;
            let stab = (0..=hi).filter(|&n| {
                shift_word(w, n).map(|v| v.first_difference(w).is_none()).unwrap_or(false)
            });
            (window, WindowSet::integers(window, stab))
        }
        _ => {
            let window = res.time_window;
            let mut hits = Vec::new();
            for t in time_grid(system, res) {
                if same_point(&space, &system.act(&t, p)?, p, 1e-9) {
                    hits.push(t.as_time().expect("time kinds"));
                }
            }
            let set = match system.element_kind() {
                ElementKind::IntTime => WindowSet::integers(window, hits.iter().map(|&t| t as i64)),
                _ => {
                    let step = 1.0 / res.time_density as f64;
                    let mut ivs: Vec<(f64, f64)> = Vec::new();
                    for t in hits {
                        match ivs.last_mut() {
                            Some(last) if t - last.1 <= step * 1.5 => last.1 = t,
                            _ => ivs.push((t, t)),
                        }
                    }
                    WindowSet::intervals(window, ivs)
                }
            };
            (window, set)
        }
    };
    let bound = (window.hi - window.lo) / 4.0;
    let c = set_class_check(&set, crate::sets::SetClass::Syndetic, &ClassParams::with_compact(bound_compact(system, bound)))?;
    let stab_desc = match set.as_integers() {
        Some(v) => format!("stabilizer times {:?}", &v[..v.len().min(16)]),
        None => "stabilizer intervals".to_string(),
    };
    Ok(Certificate::new(system.name(), "periodic", c.verdict)
        .param("syndetic_bound", bound)
        .witnesses(c.witnesses)
        .note(stab_desc))
}

fn almost_periodic(system: &DynamicalSystem, p: &Point, res: &Resolution) -> Result<Certificate> {
    if system.element_kind() == ElementKind::Mat2 {
        return Err(ChaosError::usage("almost periodicity is not decided for matrix time"));
    }
    let bound = res.gap_bound();
    let params = ClassParams::with_compact(bound_compact(system, bound));
    let mut verdict = Verdict::Verified;
    let mut cert = Certificate::new(system.name(), "almost_periodic", Verdict::Verified).param("syndetic_bound", bound);
    for &eps in &res.epsilon_grid {
        let set = point_hits(system, p, &OpenSet::ball(p.clone(), eps), res.time_window)?;
        let c = set_class_check(&set, crate::sets::SetClass::Syndetic, &params)?;
        verdict = verdict.and(c.verdict);
        for w in c.witnesses {
            cert = cert.witness(w.label(format!("eps={eps}")));
        }
    }
    cert.verdict = verdict;
    Ok(cert)
}

/// Candidate return elements; matrices use conjugates of the unipotent
/// family fixing 0.
fn return_candidates(system: &DynamicalSystem, p: &Point, res: &Resolution) -> Result<Vec<GroupElement>> {
    if let CatalogEntry::Mobius = system.entry() {
        let x = p.as_ext_real().ok_or_else(|| ChaosError::usage("expected an extended real"))?;
        let g = if x == ExtReal::Finite(0.0) {
            Mat2::IDENTITY
        } else {
            mobius_transport(x, ExtReal::Finite(0.0))?
        };
        let gi = g.inverse();
        return Ok((1..=res.max_steps)
            .map(|m| GroupElement::Mat2(gi.mul(&Mat2::new(1.0, 0.0, m as f64, 1.0).expect("unipotent")).mul(&g)))
            .collect());
    }
    Ok(time_grid(system, res))
}

fn recurrent(system: &DynamicalSystem, p: &Point, refseq: &ReferenceSequence, res: &Resolution) -> Result<Certificate> {
    if refseq.kind != system.element_kind() {
        return Err(ChaosError::usage("reference sequence kind differs from the system's time"));
    }
    let space = system.space();
    let eps = res.eps_min();
    let cands = return_candidates(system, p, res)?;
    let mut dists = Vec::with_capacity(cands.len());
    for t in &cands {
        let (_, hi) = distance_bounds(&space, &system.act(t, p)?, p)?;
        dists.push(hi);
    }
    let mut cert = Certificate::new(system.name(), "recurrent", Verdict::Verified)
        .param("refseq", refseq.name())
        .param("horizon", res.horizon_index);
    let mut w = Witness::new("returns");
    for n in 1..=res.horizon_index {
        let best = cands
            .iter()
            .zip(&dists)
            .filter(|(t, _)| !refseq.contains(n, t))
            .min_by(|a, b| a.1.total_cmp(b.1));
        match best {
            None => {
                cert.verdict = Verdict::Inconclusive;
                return Ok(cert
                    .witness(w)
                    .note(format!("no candidate time outside F_{n} in the window; limiting parameter: time_window")));
            }
            Some((t, d)) if *d >= eps => {
                let mut c = Certificate::new(system.name(), "recurrent", Verdict::Refuted)
                    .param("refseq", refseq.name())
                    .param("horizon", res.horizon_index)
                    .witness(
                        Witness::new("no_return")
                            .element(t.clone())
                            .distance(*d)
                            .at(n),
                    )
                    .note(format!(
                        "every window time outside F_{n} keeps the orbit at distance >= {d} > {eps}"
                    ));
                c.verdict = Verdict::Refuted;
                return Ok(c);
            }
            Some((t, d)) => {
                w = w.element(t.clone()).distance(*d);
            }
        }
    }
    Ok(cert.witness(w.at(res.horizon_index)).note(format!(
        "returns within {eps} at times outside F_n for n = 1..{}",
        res.horizon_index
    )))
}

fn transitive_point(system: &DynamicalSystem, p: &Point, res: &Resolution) -> Result<Certificate> {
    let fam = family(system, res)?;
    let mut times = Vec::new();
    for v in &fam {
        match orbit_hit(system, p, v, res)? {
            Some(t) => times.push(t),
            None => {
                return Ok(Certificate::new(system.name(), "transitive_point", Verdict::Refuted)
                    .witness(Witness::new("orbit_misses").point(p.clone()).label(v.to_string()))
                    .note("refuted relative to the time window"));
            }
        }
    }
    Ok(Certificate::new(system.name(), "transitive_point", Verdict::Verified)
        .witness(Witness::new("visits").point(p.clone()).elements(times.into_iter().take(64))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::build_system;

    #[test]
    fn rational_rotation_is_periodic() {
        let rot = build_system(CatalogEntry::CircleRotation { alpha: 0.25 }).unwrap();
        let res = Resolution::for_system(&rot);
        let c = classify_point(&rot, &Point::circle(0.3), PointKind::Periodic, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
    }

    #[test]
    fn translation_flow_points() {
        let flow = build_system(CatalogEntry::TranslationFlow).unwrap();
        let res = Resolution::for_system(&flow);
        let c = classify_point(&flow, &Point::real(0.0), PointKind::Recurrent, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
        let c = classify_point(&flow, &Point::infinity(), PointKind::Periodic, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        let c = classify_point(&flow, &Point::real(0.0), PointKind::Periodic, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
    }

    #[test]
    fn transitive_word_recurs() {
        let shift = build_system(CatalogEntry::FullShift { alphabet: 2, length: 1024 }).unwrap();
        let res = Resolution::for_system(&shift).with_window(0.0, 1023.0);
        let w = Point::Word(transitive_word(2, 1024));
        let c = classify_point(&shift, &w, PointKind::Recurrent, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Verified, "{:?}", c.notes);
        assert!(transitive_word(2, 10).symbols.starts_with(&[0, 1, 0, 0, 0, 1, 1, 0, 1, 1]));
    }

    #[test]
    fn mobius_points_recur() {
        let m = build_system(CatalogEntry::Mobius).unwrap();
        let res = Resolution::for_system(&m);
        let c = classify_point(&m, &Point::real(2.0), PointKind::Recurrent, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
    }
}
