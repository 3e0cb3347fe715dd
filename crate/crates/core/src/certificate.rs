//! Three-valued verdicts with replayable witnesses.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::element::GroupElement;
use crate::space::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Verified,
    Refuted,
    Inconclusive,
}

impl Verdict {
    /// CLI exit code for the verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::Refuted => 1,
            Verdict::Inconclusive => 2,
        }
    }

    /// Conjunction: any refutation wins, then any inconclusive part.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Refuted, _) | (_, Refuted) => Refuted,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Verified,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Verified => "Verified",
            Verdict::Refuted => "Refuted",
            Verdict::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: String,
    #[serde(default)]
    pub elements: Vec<GroupElement>,
    #[serde(default)]
    pub points: Vec<Point>,
    #[serde(default)]
    pub distances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Free-form labels (open sets, set descriptors) that are not points.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

impl Witness {
    pub fn new(kind: impl Into<String>) -> Witness {
        Witness {
            kind: kind.into(),
            ..Witness::default()
        }
    }

    pub fn element(mut self, t: GroupElement) -> Self {
        self.elements.push(t);
        self
    }

    pub fn elements(mut self, ts: impl IntoIterator<Item = GroupElement>) -> Self {
        self.elements.extend(ts);
        self
    }

    pub fn point(mut self, p: Point) -> Self {
        self.points.push(p);
        self
    }

    pub fn points(mut self, ps: impl IntoIterator<Item = Point>) -> Self {
        self.points.extend(ps);
        self
    }

    pub fn distance(mut self, d: f64) -> Self {
        self.distances.push(d);
        self
    }

    pub fn at(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn label(mut self, l: impl Into<String>) -> Self {
        self.labels.push(l.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub version: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub system: String,
    pub property: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    pub verdict: Verdict,
    #[serde(default)]
    pub witnesses: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Value>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<Certificate>,
    #[serde(default)]
    pub meta: Meta,
}

impl Certificate {
    pub fn new(system: impl Into<String>, property: impl Into<String>, verdict: Verdict) -> Self {
        Certificate {
            system: system.into(),
            property: property.into(),
            parameters: BTreeMap::new(),
            verdict,
            witnesses: Vec::new(),
            resolution: None,
            notes: Vec::new(),
            parts: Vec::new(),
            meta: Meta {
                timestamp: None,
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: 0,
            },
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.parameters.insert(key.to_string(), v);
        self
    }

    pub fn witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }

    pub fn witnesses(mut self, ws: impl IntoIterator<Item = Witness>) -> Self {
        self.witnesses.extend(ws);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn part(mut self, c: Certificate) -> Self {
        self.parts.push(c);
        self
    }

    pub fn with_resolution(mut self, res: &impl Serialize) -> Self {
        self.resolution = serde_json::to_value(res).ok();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.meta.seed = seed;
        for p in &mut self.parts {
            p.meta.seed = seed;
        }
        self
    }

    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }

    pub fn parameter_f64(&self, key: &str) -> Option<f64> {
        self.parameters.get(key).and_then(Value::as_f64)
    }

    pub fn witnesses_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Witness> + 'a {
        self.witnesses.iter().filter(move |w| w.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Certificate> {
        serde_json::from_str(s)
    }

    /// JSON with the `meta` block removed, recursively; used for determinism comparisons.
    pub fn to_json_without_meta(&self) -> String {
        let mut v = serde_json::to_value(self).expect("certificates serialize");
        strip_meta(&mut v);
        serde_json::to_string_pretty(&v).expect("values serialize")
    }

    /// CSV rows `(n, element, distance)` flattened from the witnesses.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("witness,kind,n,element,distance\n");
        for (i, w) in self.witnesses.iter().enumerate() {
            let rows = w.distances.len().max(w.elements.len());
            for r in 0..rows {
                let elem = w
                    .elements
                    .get(r)
                    .map(|e| e.to_string())
                    .unwrap_or_default()
                    .replace(',', ";");
                let dist = w.distances.get(r).map(|d| d.to_string()).unwrap_or_default();
                let n = w.n.map(|n| n.to_string()).unwrap_or_default();
                out.push_str(&format!("{i},{},{n},{elem},{dist}\n", w.kind));
            }
        }
        out
    }
}

fn strip_meta(v: &mut Value) {
    if let Value::Object(map) = v {
        map.remove("meta");
        for (_, child) in map.iter_mut() {
            strip_meta(child);
        }
    } else if let Value::Array(items) = v {
        for child in items {
            strip_meta(child);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_conjunction() {
        use Verdict::*;
        assert_eq!(Verified.and(Verified), Verified);
        assert_eq!(Verified.and(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.and(Refuted), Refuted);
        assert_eq!(
            [Verified, Refuted, Inconclusive].map(Verdict::exit_code),
            [0, 1, 2]
        );
    }

    #[test]
    fn json_roundtrip_and_meta_strip() {
        let c = Certificate::new("mobius", "li_yorke", Verdict::Verified)
            .param("horizon", 50)
            .witness(
                Witness::new("proximal")
                    .element(GroupElement::IntTime(3))
                    .point(Point::infinity())
                    .distance(0.1 + 0.2)
                    .at(4),
            )
            .part(Certificate::new("mobius", "sub", Verdict::Refuted));
        let back = Certificate::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let stripped = c.to_json_without_meta();
        assert!(!stripped.contains("\"meta\""));
        assert!(c.to_csv().lines().count() >= 2);
    }
}
