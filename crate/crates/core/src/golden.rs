//! Fixed suite of worked examples with expected verdicts.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::certificate::{Certificate, Verdict};
use crate::detectors::{
    classify_point, detect_minimality, detect_sensitivity, detect_transitivity, devaney_check, pair_relation,
    two_circle_refseq, PairRelationKind, PointKind, Resolution, TransitivityKind,
};
use crate::element::ElementKind;
use crate::error::{ChaosError, Result};
use crate::qsqrt2::QSqrt2;
use crate::sets::{make_reference_sequence, RefTemplate};
use crate::space::{Point, TwoCirclePoint};
use crate::systems::{build_system, CatalogEntry};

pub const GROUPS: [&str; 6] = ["example-1.1", "example-1.3", "example-1.4", "example-2.18", "shift", "cross-checks"];

pub const ROTATION_ALPHA: f64 = 0.41421356;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldenOutcome {
    pub id: String,
    pub group: String,
    pub expected: Verdict,
    pub actual: Verdict,
    pub passed: bool,
    /// SHA-256 of the certificate without its metadata block.
    pub digest: String,
    #[serde(skip)]
    pub certificate: Option<Certificate>,
}

struct Check {
    id: &'static str,
    group: &'static str,
    expected: Verdict,
    run: fn(u64) -> Result<Certificate>,
}

fn forward(kind: ElementKind) -> Result<crate::sets::ReferenceSequence> {
    make_reference_sequence(kind, RefTemplate::ForwardInterval)
}

fn symmetric(kind: ElementKind) -> Result<crate::sets::ReferenceSequence> {
    make_reference_sequence(kind, RefTemplate::SymmetricInterval)
}

fn seeded(mut r: Resolution, seed: u64) -> Resolution {
    r.seed = seed;
    r
}

fn flow_res(seed: u64) -> Result<(crate::dynamics::DynamicalSystem, Resolution)> {
    let sys = build_system(CatalogEntry::TranslationFlow)?;
    let res = seeded(Resolution::for_system(&sys).with_window(0.0, 100.0), seed);
    Ok((sys, res))
}

fn shift64() -> Result<crate::dynamics::DynamicalSystem> {
    build_system(CatalogEntry::FullShift { alphabet: 2, length: 64 })
}

fn checks() -> Vec<Check> {
    vec![
        Check {
            id: "example-1.1/li-yorke-pair",
            group: "example-1.1",
            expected: Verdict::Refuted,
            run: |seed| {
                let (sys, res) = flow_res(seed)?;
                pair_relation(&sys, &Point::real(0.0), &Point::real(1.0), PairRelationKind::LiYorke, &forward(ElementKind::RealTime)?, &res)
            },
        },
        Check {
            id: "example-1.1/recurrent-0",
            group: "example-1.1",
            expected: Verdict::Refuted,
            run: |seed| {
                let (sys, res) = flow_res(seed)?;
                classify_point(&sys, &Point::real(0.0), PointKind::Recurrent, &res)
            },
        },
        Check {
            id: "example-1.1/topological-transitivity",
            group: "example-1.1",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = build_system(CatalogEntry::TranslationFlow)?;
                detect_transitivity(&sys, TransitivityKind::Topological, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "example-1.1/minimality",
            group: "example-1.1",
            expected: Verdict::Refuted,
            run: |seed| {
                let sys = build_system(CatalogEntry::TranslationFlow)?;
                detect_minimality(&sys, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "example-1.3/li-yorke-pair",
            group: "example-1.3",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = build_system(CatalogEntry::Mobius)?;
                let f = make_reference_sequence(ElementKind::Mat2, RefTemplate::MatrixNormBall)?;
                pair_relation(&sys, &Point::real(0.0), &Point::real(1.0), PairRelationKind::LiYorke, &f, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "example-1.3/sensitivity",
            group: "example-1.3",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = build_system(CatalogEntry::Mobius)?;
                detect_sensitivity(&sys, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "example-1.4/li-yorke-pair",
            group: "example-1.4",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = build_system(CatalogEntry::TwoCircle)?;
                let res = seeded(Resolution::for_system(&sys), seed);
                let y = QSqrt2::from_ratios((1, 3), (0, 1));
                let a = Point::TwoCircle(TwoCirclePoint::new(y.clone(), 0)?);
                let b = Point::TwoCircle(TwoCirclePoint::new(y, 1)?);
                pair_relation(&sys, &a, &b, PairRelationKind::LiYorke, &two_circle_refseq(res.horizon_index)?, &res)
            },
        },
        Check {
            id: "example-1.4/sensitivity",
            group: "example-1.4",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = build_system(CatalogEntry::TwoCircle)?;
                detect_sensitivity(&sys, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "example-2.18/li-yorke-pair",
            group: "example-2.18",
            expected: Verdict::Refuted,
            run: |seed| {
                let sys = build_system(CatalogEntry::IntegerTranslation)?;
                pair_relation(&sys, &Point::real(0.0), &Point::real(1.0), PairRelationKind::LiYorke, &symmetric(ElementKind::IntTime)?, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "example-2.18/periodic-infinity",
            group: "example-2.18",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = build_system(CatalogEntry::IntegerTranslation)?;
                classify_point(&sys, &Point::infinity(), PointKind::Periodic, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "example-2.18/periodic-0",
            group: "example-2.18",
            expected: Verdict::Refuted,
            run: |seed| {
                let sys = build_system(CatalogEntry::IntegerTranslation)?;
                classify_point(&sys, &Point::real(0.0), PointKind::Periodic, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "shift/devaney",
            group: "shift",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = shift64()?;
                devaney_check(&sys, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "shift/sensitivity",
            group: "shift",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = shift64()?;
                detect_sensitivity(&sys, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "shift/weak-mixing",
            group: "shift",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = shift64()?;
                detect_transitivity(&sys, TransitivityKind::WeakMixing, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "shift/strong-mixing",
            group: "shift",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = shift64()?;
                detect_transitivity(&sys, TransitivityKind::StrongMixing, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "cross-checks/rotation-sensitivity",
            group: "cross-checks",
            expected: Verdict::Refuted,
            run: |seed| {
                let sys = build_system(CatalogEntry::CircleRotation { alpha: ROTATION_ALPHA })?;
                detect_sensitivity(&sys, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "cross-checks/rotation-minimal",
            group: "cross-checks",
            expected: Verdict::Verified,
            run: |seed| {
                let sys = build_system(CatalogEntry::CircleRotation { alpha: ROTATION_ALPHA })?;
                detect_minimality(&sys, &seeded(Resolution::for_system(&sys), seed))
            },
        },
        Check {
            id: "cross-checks/rotation-devaney",
            group: "cross-checks",
            expected: Verdict::Refuted,
            run: |seed| {
                let sys = build_system(CatalogEntry::CircleRotation { alpha: ROTATION_ALPHA })?;
                devaney_check(&sys, &seeded(Resolution::for_system(&sys), seed))
            },
        },
    ]
}

pub fn digest(cert: &Certificate) -> String {
    let h = Sha256::digest(cert.to_json_without_meta().as_bytes());
    h.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Runs the suite, or the checks whose id or group equals `only`.
pub fn run_golden(only: Option<&str>, seed: u64) -> Result<Vec<GoldenOutcome>> {
    let all = checks();
    let selected: Vec<&Check> = match only {
        None => all.iter().collect(),
        Some(f) => all.iter().filter(|c| c.group == f || c.id == f).collect(),
    };
    if selected.is_empty() {
        return Err(ChaosError::usage(format!(
            "unknown filter {:?}; groups are {}",
            only.unwrap_or_default(),
            GROUPS.join(", ")
        )));
    }
    selected
        .into_iter()
        .map(|c| {
            let cert = (c.run)(seed)?;
            Ok(GoldenOutcome {
                id: c.id.into(),
                group: c.group.into(),
                expected: c.expected,
                actual: cert.verdict,
                passed: cert.verdict == c.expected,
                digest: digest(&cert),
                certificate: Some(cert),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_cover_every_check() {
        for c in checks() {
            assert!(GROUPS.contains(&c.group), "{}", c.id);
            assert!(c.id.starts_with(c.group));
        }
        assert!(checks().len() >= 10);
    }

    #[test]
    fn filter_selects_group() {
        let out = run_golden(Some("example-2.18"), 0).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|o| o.passed), "{out:?}");
        assert!(run_golden(Some("example-9.9"), 0).is_err());
    }
}
