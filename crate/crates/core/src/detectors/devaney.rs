//! Devaney chaos: transitive, dense periodic points, not minimal.

use std::collections::HashMap;

use super::{classify_point, detect_minimality, detect_transitivity, echo_resolution, test_sets, PointKind, Resolution, TransitivityKind};
use crate::certificate::{Certificate, Verdict, Witness};
use crate::dynamics::DynamicalSystem;
use crate::element::ElementKind;
use crate::error::Result;
use crate::open_set::OpenSet;
use crate::space::{Point, Word};
use crate::systems::CatalogEntry;

pub fn devaney_check(system: &DynamicalSystem, res: &Resolution) -> Result<Certificate> {
    res.validate()?;
    system.require_metric()?;
    let name = system.name();
    let transitive = detect_transitivity(system, TransitivityKind::Topological, res)?;
    let periodic = periodic_density(system, res)?;
    let minimal = detect_minimality(system, res)?;
    let non_minimal = {
        let v = match minimal.verdict {
            Verdict::Verified => Verdict::Refuted,
            Verdict::Refuted => Verdict::Verified,
            Verdict::Inconclusive => Verdict::Inconclusive,
        };
        let mut c = Certificate::new(&name, "non_minimal", v);
        c.witnesses = minimal.witnesses.clone();
        c.notes = minimal.notes.clone();
        c
    };
    let verdict = transitive.verdict.and(periodic.verdict).and(non_minimal.verdict);
    Ok(Certificate::new(&name, "devaney", verdict)
        .param("transitive", transitive.verdict.to_string())
        .param("dense_periodic", periodic.verdict.to_string())
        .param("non_minimal", non_minimal.verdict.to_string())
        .part(transitive)
        .part(periodic)
        .part(non_minimal)
        .with_resolution(&echo_resolution(res))
        .with_seed(res.seed))
}

/// Every test set contains a point whose periodicity verifies.
fn periodic_density(system: &DynamicalSystem, res: &Resolution) -> Result<Certificate> {
    let name = system.name();
    if system.element_kind() == ElementKind::Mat2 {
        return Ok(Certificate::new(name, "dense_periodic", Verdict::Inconclusive).note("periodicity is not decided for matrix time"));
    }
    let mut verified: HashMap<String, bool> = HashMap::new();
    let mut is_periodic = |p: &Point| -> Result<bool> {
        let key = p.to_string();
        if let Some(&b) = verified.get(&key) {
            return Ok(b);
        }
        let b = classify_point(system, p, PointKind::Periodic, res)?.verdict == Verdict::Verified;
        verified.insert(key, b);
        Ok(b)
    };
    let cells = test_sets(system, res)?;
    let mut witnesses = Vec::new();
    for cell in &cells {
        let candidates = match (system.entry(), cell) {
            (CatalogEntry::FullShift { alphabet, length }, OpenSet::Pattern(p)) => {
                let block: Vec<u8> = p.iter().map(|s| s.unwrap_or(0)).collect();
                vec![Point::Word(Word::periodic(*alphabet, &block, *length)?)]
            }
            _ => cell.samples(system, 8)?,
        };
        let mut hit = None;
        for y in candidates {
            if cell.contains(system, &y)? && is_periodic(&y)? {
                hit = Some(y);
                break;
            }
        }
        match hit {
            Some(y) => witnesses.push(Witness::new("periodic").point(y).label(cell.to_string())),
            None => {
                return Ok(Certificate::new(name, "dense_periodic", Verdict::Refuted)
                    .witness(Witness::new("no_periodic").label(cell.to_string()))
                    .note(format!("no sampled point of {cell} is periodic at resolution")));
            }
        }
    }
    Ok(Certificate::new(name, "dense_periodic", Verdict::Verified)
        .param("cells", cells.len())
        .witnesses(witnesses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::build_system;

    #[test]
    fn shift_is_devaney() {
        let shift = build_system(CatalogEntry::FullShift { alphabet: 2, length: 64 }).unwrap();
        let c = devaney_check(&shift, &Resolution::for_system(&shift)).unwrap();
        assert_eq!(c.verdict, Verdict::Verified, "{:#?}", c.notes);
        assert_eq!(c.parts.len(), 3);
    }

    #[test]
    fn rotation_and_flow_are_not() {
        let rot = build_system(CatalogEntry::CircleRotation { alpha: 0.41421356 }).unwrap();
        let c = devaney_check(&rot, &Resolution::for_system(&rot)).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
        assert_eq!(c.parts[1].verdict, Verdict::Refuted);
        let flow = build_system(CatalogEntry::TranslationFlow).unwrap();
        let c = devaney_check(&flow, &Resolution::for_system(&flow)).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
    }
}
