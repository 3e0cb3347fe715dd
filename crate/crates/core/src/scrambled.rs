//! Finite-depth scrambled families on the full shift.
//!
//! A word is a leading `0` followed by stages; stage `j` is laid out as
//!
//! ```text
//! [address bit][copy of w[0..j)][!w[j]][0 repeated 2^j][1]
//!               ^ s_j                   ^ t_j
//! ```
//!
//! so `d(σ^{s_j} w, w) = 2^-j` and `d(σ^{t_j} w, 0^∞) = 2^-(2^j)` exactly,
//! for every word at once.

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Verdict, Witness};
use crate::detectors::{multidim_with_schedule, pair_relation, test_sets, PairRelationKind, Resolution, TupleSchedule};
use crate::dynamics::DynamicalSystem;
use crate::element::{ElementKind, GroupElement};
use crate::error::{ChaosError, Result};
use crate::open_set::OpenSet;
use crate::sets::ReferenceSequence;
use crate::space::{shift_distance, Point, Word};
use crate::systems::{shift_word, CatalogEntry};

/// Exhaustive tuple checks up to this depth, sampling beyond.
pub const EXHAUSTIVE_DEPTH: usize = 4;
const SAMPLES_PER_K: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub j: usize,
    /// Position of the address bit written in this stage.
    pub address_slot: usize,
    /// Which address bit the slot carries.
    pub address_bit: usize,
    /// Return time: the prefix of length `j` is repeated here.
    pub s: usize,
    /// Collapse time: a zero block of length `block` starts here.
    pub t: usize,
    pub block: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScrambledFamily {
    pub k_max: usize,
    pub depth: usize,
    pub length: usize,
    #[serde(with = "word_strings")]
    pub words: Vec<Word>,
    pub schedule: Vec<Stage>,
    pub refseq: ReferenceSequence,
}

mod word_strings {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::space::Word;

    pub fn serialize<S: Serializer>(ws: &[Word], s: S) -> Result<S::Ok, S::Error> {
        ws.iter().map(|w| w.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Word>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| Word::parse(2, s, s.len()).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl ScrambledFamily {
    pub fn returns(&self) -> Vec<GroupElement> {
        self.schedule.iter().map(|s| GroupElement::IntTime(s.s as i64)).collect()
    }

    pub fn collapses(&self) -> Vec<GroupElement> {
        self.schedule.iter().map(|s| GroupElement::IntTime(s.t as i64)).collect()
    }

    pub fn tuple_schedule(&self) -> TupleSchedule {
        TupleSchedule {
            returns: self.returns(),
            collapses: self.collapses(),
            target: Some(Point::Word(Word::zeros(2, self.length))),
        }
    }
}

fn stage_len(j: usize) -> usize {
    j + 3 + (1usize << j)
}

/// Smallest truncation holding `stages` stages.
pub fn minimal_length(stages: usize) -> usize {
    1 + (1..=stages).map(stage_len).sum::<usize>()
}

pub fn build_scrambled_family(k_max: usize, depth: usize, refseq: &ReferenceSequence, length: usize) -> Result<ScrambledFamily> {
    if depth == 0 || depth > 16 {
        return Err(ChaosError::usage("depth must be between 1 and 16"));
    }
    if k_max < 2 {
        return Err(ChaosError::usage("k_max must be at least 2"));
    }
    if refseq.kind != ElementKind::IntTime {
        return Err(ChaosError::usage("scrambled families need an integer-time reference sequence"));
    }
    let mut stages = 0;
    while stages < 62 && minimal_length(stages + 1) <= length {
        stages += 1;
    }
    if stages < depth {
        return Err(ChaosError::HorizonExhausted { needed: minimal_length(depth), available: length });
    }
    let mut schedule = Vec::with_capacity(stages);
    let mut pos = 1;
    for j in 1..=stages {
        let s = pos + 1;
        let t = s + j + 1;
        schedule.push(Stage { j, address_slot: pos, address_bit: (j - 1) % depth, s, t, block: 1 << j });
        pos += stage_len(j);
    }
    for st in &schedule {
        if refseq.contains(st.j, &GroupElement::IntTime(st.s as i64)) {
            return Err(ChaosError::usage(format!("return time s_{} = {} lies in F_{}", st.j, st.s, st.j)));
        }
    }
    let words = (0..1usize << depth)
        .map(|addr| {
            let mut w = vec![0u8; length];
            for st in &schedule {
                w[st.address_slot] = ((addr >> (depth - 1 - st.address_bit)) & 1) as u8;
                for i in 0..st.j {
                    w[st.s + i] = w[i];
                }
                w[st.s + st.j] = 1 - w[st.j];
                // zeros already in place on [t, t + block)
                w[st.t + st.block] = 1;
            }
            Word::new(2, w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScrambledFamily { k_max, depth, length, words, schedule, refseq: refseq.clone() })
}

/// Runs the tuple detector over every k-subset (sampled past depth 4).
pub fn verify_family(system: &DynamicalSystem, fam: &ScrambledFamily, res: &Resolution) -> Result<Certificate> {
    match system.entry() {
        CatalogEntry::FullShift { alphabet: 2, length } if *length == fam.length && !system.is_product() => {}
        _ => return Err(ChaosError::usage("family truncation does not match the system")),
    }
    let name = system.name();
    if fam.schedule.is_empty() {
        return Ok(Certificate::new(name, "scrambled_family", Verdict::Inconclusive).note("empty schedule: no witnesses"));
    }
    for st in &fam.schedule {
        if fam.refseq.contains(st.j, &GroupElement::IntTime(st.s as i64)) {
            return Ok(Certificate::new(name, "scrambled_family", Verdict::Refuted)
                .witness(Witness::new("schedule_violation").element(GroupElement::IntTime(st.s as i64)).at(st.j))
                .note(format!("s_{} = {} lies in F_{}", st.j, st.s, st.j)));
        }
    }
    // exact replay of the scheduled distances
    let zero = Word::zeros(2, fam.length);
    for (i, w) in fam.words.iter().enumerate() {
        for st in &fam.schedule {
            let r = shift_distance(&shift_word(w, st.s as i64)?, w);
            let c = shift_distance(&shift_word(w, st.t as i64)?, &zero);
            let (want_r, want_c) = (0.5f64.powi(st.j as i32), 0.5f64.powi(st.block as i32));
            if r != want_r || c != want_c {
                return Ok(Certificate::new(name, "scrambled_family", Verdict::Refuted)
                    .witness(Witness::new("replay_mismatch").point(Point::Word(w.clone())).distance(r).distance(c).at(st.j))
                    .note(format!("word {i}, stage {}: replay gives {r}, {c} instead of {want_r}, {want_c}", st.j)));
            }
        }
    }
    let m = fam.words.len();
    let sched = fam.tuple_schedule();
    let mut rng = ChaCha8Rng::seed_from_u64(res.seed);
    let mut cert = Certificate::new(&name, "scrambled_family", Verdict::Verified)
        .param("members", m)
        .param("depth", fam.depth)
        .param("stages", fam.schedule.len())
        .param("replay_exact", true);
    let mut total = 0usize;
    for k in 2..=fam.k_max.min(m) {
        let subsets: Vec<Vec<usize>> = if fam.depth <= EXHAUSTIVE_DEPTH {
            (0..m).combinations(k).collect()
        } else {
            (0..SAMPLES_PER_K)
                .map(|_| {
                    let mut v = sample(&mut rng, m, k).into_vec();
                    v.sort_unstable();
                    v
                })
                .collect()
        };
        let mut passed = 0usize;
        for idx in &subsets {
            let pts: Vec<Point> = idx.iter().map(|&i| Point::Word(fam.words[i].clone())).collect();
            let c = multidim_with_schedule(system, &pts, &fam.refseq, res, Some(&sched))?;
            if c.verdict == Verdict::Verified {
                passed += 1;
            } else {
                cert.verdict = cert.verdict.and(c.verdict);
                cert = cert
                    .witness(Witness::new("failed_tuple").label(format!("{idx:?}")))
                    .note(format!("tuple {idx:?}: {}", c.verdict));
            }
        }
        total += subsets.len();
        cert = cert.param(&format!("k{k}_checked"), subsets.len()).param(&format!("k{k}_verified"), passed);
    }
    let mut w = Witness::new("schedule");
    for st in &fam.schedule {
        w = w.element(GroupElement::IntTime(st.s as i64)).distance(0.5f64.powi(st.j as i32));
    }
    let mut wc = Witness::new("collapse_schedule").point(Point::Word(zero));
    for st in &fam.schedule {
        wc = wc.element(GroupElement::IntTime(st.t as i64)).distance(0.5f64.powi(st.block as i32));
    }
    Ok(cert
        .param("tuples", total)
        .param("sampled", fam.depth > EXHAUSTIVE_DEPTH)
        .witness(w)
        .witness(wc)
        .with_seed(res.seed))
}

/// Li-Yorke partners of `x` inside each grid cell.
pub fn proximal_cell_density(system: &DynamicalSystem, x: &Point, refseq: &ReferenceSequence, res: &Resolution) -> Result<Certificate> {
    res.validate()?;
    system.require_metric()?;
    system.space().check(x)?;
    let cells = test_sets(system, res)?;
    let mut found = 0usize;
    let mut all_refuted = true;
    let mut witnesses = Vec::new();
    for cell in &cells {
        let cands = match (system.entry(), cell) {
            (CatalogEntry::FullShift { .. }, OpenSet::Pattern(u)) => spliced_partner(x, u, res).into_iter().collect(),
            _ => cell.samples(system, 8)?,
        };
        let mut hit = None;
        let mut refuted_only = true;
        for y in cands {
            if y == *x || !cell.contains(system, &y)? {
                continue;
            }
            let c = pair_relation(system, x, &y, PairRelationKind::LiYorke, refseq, res)?;
            match c.verdict {
                Verdict::Verified => {
                    hit = Some(y);
                    break;
                }
                Verdict::Inconclusive => refuted_only = false,
                Verdict::Refuted => {}
            }
        }
        match hit {
            Some(y) => {
                found += 1;
                witnesses.push(Witness::new("partner").point(y).label(cell.to_string()));
            }
            None => all_refuted &= refuted_only,
        }
    }
    let fraction = found as f64 / cells.len().max(1) as f64;
    let verdict = if found == cells.len() {
        Verdict::Verified
    } else if all_refuted {
        Verdict::Refuted
    } else {
        Verdict::Inconclusive
    };
    Ok(Certificate::new(system.name(), "proximal_cell_density", verdict)
        .param("x", x.to_string())
        .param("cells", cells.len())
        .param("density", fraction)
        .witnesses(witnesses)
        .with_seed(res.seed))
}

/// `u`, then `x`, with one flip right after the horizon: separated at the
/// flip, identical afterwards.
fn spliced_partner(x: &Point, u: &[Option<u8>], res: &Resolution) -> Option<Point> {
    let w = x.as_word()?;
    let mut s = w.symbols.clone();
    for (i, c) in u.iter().enumerate() {
        if let Some(c) = c {
            *s.get_mut(i)? = *c;
        }
    }
    let p = u.len().max(res.horizon_index + 1);
    if p + 1 > res.time_window.hi as usize || p >= s.len() {
        return None;
    }
    s[p] = (s[p] + 1) % w.alphabet;
    Word::new(w.alphabet, s).ok().map(Point::Word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{make_reference_sequence, RefTemplate};
    use crate::systems::build_system;

    fn forward() -> ReferenceSequence {
        make_reference_sequence(ElementKind::IntTime, RefTemplate::ForwardInterval).unwrap()
    }

    #[test]
    fn layout_and_minimal_length() {
        assert_eq!(minimal_length(7), 304);
        assert!(minimal_length(8) > 512);
        let fam = build_scrambled_family(3, 3, &forward(), 512).unwrap();
        assert_eq!(fam.words.len(), 8);
        assert_eq!(fam.schedule.len(), 7);
        let addresses: std::collections::BTreeSet<Vec<u8>> = fam
            .words
            .iter()
            .map(|w| fam.schedule[..3].iter().map(|st| w.symbols[st.address_slot]).collect())
            .collect();
        assert_eq!(addresses.len(), 8);
        match build_scrambled_family(2, 3, &forward(), 20) {
            Err(ChaosError::HorizonExhausted { needed, .. }) => assert_eq!(needed, minimal_length(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn depth_three_family_verifies() {
        let fam = build_scrambled_family(3, 3, &forward(), 512).unwrap();
        let shift = build_system(CatalogEntry::FullShift { alphabet: 2, length: 512 }).unwrap();
        let res = Resolution::for_system(&shift).with_horizon(3);
        let c = verify_family(&shift, &fam, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Verified, "{:?}", c.notes);
        assert_eq!(c.parameter_f64("k3_verified"), Some(56.0));
    }

    #[test]
    fn moved_schedule_is_refuted() {
        let mut fam = build_scrambled_family(2, 1, &forward(), 512).unwrap();
        fam.schedule[2].s = 1;
        let shift = build_system(CatalogEntry::FullShift { alphabet: 2, length: 512 }).unwrap();
        let c = verify_family(&shift, &fam, &Resolution::for_system(&shift)).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
        fam.schedule.clear();
        let c = verify_family(&shift, &fam, &Resolution::for_system(&shift)).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn json_round_trip() {
        let fam = build_scrambled_family(2, 2, &forward(), 128).unwrap();
        let s = serde_json::to_string(&fam).unwrap();
        assert_eq!(serde_json::from_str::<ScrambledFamily>(&s).unwrap(), fam);
    }

    #[test]
    fn shift_partners_are_dense() {
        let shift = build_system(CatalogEntry::FullShift { alphabet: 2, length: 64 }).unwrap();
        let res = Resolution::for_system(&shift).with_horizon(16);
        let x = Point::Word(crate::detectors::transitive_word(2, 64));
        let c = proximal_cell_density(&shift, &x, &forward(), &res).unwrap();
        assert_eq!(c.verdict, Verdict::Verified, "{:?}", c.notes);
        assert_eq!(c.parameter_f64("density"), Some(1.0));
    }
}
