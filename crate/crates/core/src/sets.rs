//! Windowed combinatorics of subsets of the acting semigroup: thick,
//! syndetic, piecewise syndetic and IP classes, hitting-time sets and
//! reference sequences.
//!
//! Every unbounded quantifier over `T` is relativized to a finite window, so
//! classifications come back as three-valued certificates.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Verdict, Witness};
use crate::dynamics::DynamicalSystem;
use crate::element::{ElementKind, GroupElement};
use crate::error::{ChaosError, Result};
use crate::open_set::OpenSet;
use crate::qsqrt2::QSqrt2;
use crate::space::{Point, SpaceKind};

/// A compact window `[lo, hi]` of real or integer times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub lo: f64,
    pub hi: f64,
}

impl TimeWindow {
    pub fn new(lo: f64, hi: f64) -> Result<TimeWindow> {
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(ChaosError::usage(format!("invalid time window [{lo}, {hi}]")));
        }
        Ok(TimeWindow { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn int_range(&self) -> std::ops::RangeInclusive<i64> {
        (self.lo.ceil() as i64)..=(self.hi.floor() as i64)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Members {
    /// Sorted, deduplicated integer times.
    Integers(Vec<i64>),
    /// Disjoint closed intervals, sorted.
    Intervals(Vec<(f64, f64)>),
    /// Exact circle elements (discrete circle group).
    Circle(Vec<QSqrt2>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSet {
    pub kind: ElementKind,
    pub window: TimeWindow,
    pub members: Members,
}

impl WindowSet {
    pub fn integers(window: TimeWindow, items: impl IntoIterator<Item = i64>) -> WindowSet {
        let set: BTreeSet<i64> = items.into_iter().filter(|t| window.contains(*t as f64)).collect();
        WindowSet {
            kind: ElementKind::IntTime,
            window,
            members: Members::Integers(set.into_iter().collect()),
        }
    }

    /// Normalizes arbitrary intervals into sorted disjoint ones clipped to the window.
    pub fn intervals(window: TimeWindow, items: impl IntoIterator<Item = (f64, f64)>) -> WindowSet {
        let mut v: Vec<(f64, f64)> = items
            .into_iter()
            .map(|(a, b)| (a.max(window.lo), b.min(window.hi)))
            .filter(|(a, b)| a <= b)
            .collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in v {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        WindowSet {
            kind: ElementKind::RealTime,
            window,
            members: Members::Intervals(merged),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.members {
            Members::Integers(v) => v.is_empty(),
            Members::Intervals(v) => v.is_empty(),
            Members::Circle(v) => v.is_empty(),
        }
    }

    pub fn contains_time(&self, t: f64) -> bool {
        match &self.members {
            Members::Integers(v) => t.fract() == 0.0 && v.binary_search(&(t as i64)).is_ok(),
            Members::Intervals(v) => v.iter().any(|(a, b)| t >= *a && t <= *b),
            Members::Circle(_) => false,
        }
    }

    pub fn as_integers(&self) -> Option<&[i64]> {
        match &self.members {
            Members::Integers(v) => Some(v),
            _ => None,
        }
    }

    pub fn first(&self) -> Option<f64> {
        match &self.members {
            Members::Integers(v) => v.first().map(|&t| t as f64),
            Members::Intervals(v) => v.first().map(|x| x.0),
            Members::Circle(_) => None,
        }
    }

    /// Integer members of `self ∩ other`.
    pub fn intersect_integers(&self, other: &WindowSet) -> Vec<i64> {
        match (&self.members, &other.members) {
            (Members::Integers(a), Members::Integers(b)) => {
                let bs: BTreeSet<_> = b.iter().collect();
                a.iter().filter(|t| bs.contains(t)).copied().collect()
            }
            _ => Vec::new(),
        }
    }

    fn describe(&self) -> String {
        match &self.members {
            Members::Integers(v) => format!("{} integer times in [{}, {}]", v.len(), self.window.lo, self.window.hi),
            Members::Intervals(v) => format!("{} intervals in [{}, {}]", v.len(), self.window.lo, self.window.hi),
            Members::Circle(v) => format!("{} circle elements", v.len()),
        }
    }
}

/// The compact set `K` used by thick/syndetic tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Compact {
    Finite(Vec<i64>),
    Interval(f64, f64),
}

impl Compact {
    fn integer_offsets(&self) -> Vec<i64> {
        match self {
            Compact::Finite(v) => v.clone(),
            Compact::Interval(a, b) => ((a.ceil() as i64)..=(b.floor() as i64)).collect(),
        }
    }

    fn span(&self) -> (f64, f64) {
        match self {
            Compact::Finite(v) => (
                v.iter().copied().min().unwrap_or(0) as f64,
                v.iter().copied().max().unwrap_or(0) as f64,
            ),
            Compact::Interval(a, b) => (*a, *b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetClass {
    Thick,
    Syndetic,
    PiecewiseSyndetic,
    Ip,
}

impl SetClass {
    pub fn name(self) -> &'static str {
        match self {
            SetClass::Thick => "thick",
            SetClass::Syndetic => "syndetic",
            SetClass::PiecewiseSyndetic => "piecewise_syndetic",
            SetClass::Ip => "ip",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    /// Test compact for thick, bound for syndetic and piecewise syndetic.
    pub compact: Compact,
    /// Generator count for IP.
    pub generators: usize,
    /// Length of the run required by piecewise syndeticity.
    pub run_length: f64,
    /// Grid step used when searching IP generators inside intervals.
    pub ip_step: f64,
}

impl Default for ClassParams {
    fn default() -> Self {
        ClassParams {
            compact: Compact::Interval(0.0, 1.0),
            generators: 3,
            run_length: 10.0,
            ip_step: 0.5,
        }
    }
}

impl ClassParams {
    pub fn with_compact(compact: Compact) -> ClassParams {
        ClassParams {
            compact,
            ..ClassParams::default()
        }
    }
}

fn times_of(s: &WindowSet, t: f64) -> GroupElement {
    match s.kind {
        ElementKind::IntTime => GroupElement::IntTime(t as i64),
        _ => GroupElement::RealTime(t),
    }
}

pub fn set_class_check(s: &WindowSet, class: SetClass, params: &ClassParams) -> Result<Certificate> {
    if s.window.is_empty() {
        return Err(ChaosError::usage("empty window"));
    }
    let base = Certificate::new("window_set", class.name(), Verdict::Inconclusive)
        .param("window", [s.window.lo, s.window.hi])
        .param("compact", &params.compact)
        .note(s.describe());
    match class {
        SetClass::Thick => thick(s, params, base),
        SetClass::Syndetic => syndetic(s, &params.compact, base),
        SetClass::PiecewiseSyndetic => piecewise_syndetic(s, params, base),
        SetClass::Ip => ip(s, params, base),
    }
}

fn thick(s: &WindowSet, params: &ClassParams, base: Certificate) -> Result<Certificate> {
    let (kmin, kmax) = params.compact.span();
    if kmax - kmin > s.window.len() {
        return Ok(base.note("window shorter than the test compact"));
    }
    let fits = |t: f64| s.window.contains(t + kmin) && s.window.contains(t + kmax);
    let found = match (&s.members, &params.compact) {
        (Members::Integers(v), k) => {
            let offs = k.integer_offsets();
            let kmin = offs.iter().copied().min().unwrap_or(0);
            v.iter().map(|&m| m - kmin).find(|&t| {
                fits(t as f64) && offs.iter().all(|o| v.binary_search(&(t + o)).is_ok())
            }).map(|t| t as f64)
        }
        (Members::Intervals(v), Compact::Interval(a, b)) => v
            .iter()
            .find(|(p, q)| q - p >= b - a && fits(p - a))
            .map(|(p, _)| p - a),
        (Members::Intervals(v), Compact::Finite(offs)) => v
            .iter()
            .flat_map(|(p, _)| offs.iter().map(move |o| p - *o as f64))
            .find(|&t| fits(t) && offs.iter().all(|o| s.contains_time(t + *o as f64))),
        (Members::Circle(_), _) => {
            return Err(ChaosError::usage("thickness is not defined for circle-element sets"))
        }
    };
    Ok(match found {
        Some(t) => {
            let mut c = base.witness(Witness::new("translate").element(times_of(s, t)).label(format!(
                "K+t = [{}, {}]",
                t + kmin,
                t + kmax
            )));
            c.verdict = Verdict::Verified;
            c
        }
        None => {
            let mut c = base.note("no translate of K fits inside the set within the window");
            c.verdict = Verdict::Refuted;
            c
        }
    })
}

/// Translates `t` with `K + t` inside the window and missing the set.
fn syndetic_failures(s: &WindowSet, k: &Compact) -> Result<Option<Vec<f64>>> {
    let (kmin, kmax) = k.span();
    let tlo = s.window.lo - kmin;
    let thi = s.window.hi - kmax;
    if thi < tlo {
        return Ok(None);
    }
    let mut bad = Vec::new();
    match (&s.members, k) {
        (Members::Integers(v), k) => {
            let offs = k.integer_offsets();
            for t in (tlo.ceil() as i64)..=(thi.floor() as i64) {
                if !offs.iter().any(|o| v.binary_search(&(t + o)).is_ok()) {
                    bad.push(t as f64);
                }
            }
        }
        (Members::Intervals(v), Compact::Interval(a, b)) => {
            let width = b - a;
            // gaps of the set inside the window, as open intervals
            let mut edges = vec![s.window.lo];
            let mut closed_lo = true;
            for (p, q) in v {
                let gap = (edges[edges.len() - 1], *p);
                // [t+a, t+b] fits in the gap when the gap is wider (or equal at a window edge)
                let wide = if closed_lo { gap.1 - gap.0 > width } else { gap.1 - gap.0 > width };
                if wide && gap.1 > gap.0 {
                    let start = if closed_lo { gap.0 } else { gap.0 + (gap.1 - gap.0 - width) / 2.0 };
                    bad.push(start - a);
                }
                edges.push(*q);
                closed_lo = false;
            }
            let last = edges[edges.len() - 1];
            let tail = s.window.hi - last;
            if (closed_lo && tail >= width) || (!closed_lo && tail > width) {
                bad.push(s.window.hi - b);
            }
        }
        (Members::Intervals(_), Compact::Finite(_)) => {
            return Err(ChaosError::usage(
                "syndetic checks over real intervals need an interval compact",
            ))
        }
        (Members::Circle(_), _) => {
            return Err(ChaosError::usage("syndeticity is not defined for circle-element sets"))
        }
    }
    Ok(Some(bad))
}

fn syndetic(s: &WindowSet, k: &Compact, base: Certificate) -> Result<Certificate> {
    let Some(bad) = syndetic_failures(s, k)? else {
        return Ok(base.note("window shorter than the syndetic bound"));
    };
    let (kmin, kmax) = k.span();
    let mut c = base;
    if let Some(&t) = bad.first() {
        c.verdict = Verdict::Refuted;
        c = c.witness(
            Witness::new("uncovered_translate")
                .element(times_of(s, t))
                .label(format!("K+t = [{}, {}] misses the set", t + kmin, t + kmax)),
        );
    } else {
        c.verdict = Verdict::Verified;
        // covering: members spaced at most |K| apart, listed as hits
        let hits: Vec<GroupElement> = match &s.members {
            Members::Integers(v) => v.iter().take(64).map(|&t| GroupElement::IntTime(t)).collect(),
            Members::Intervals(v) => v.iter().take(64).map(|(a, _)| GroupElement::RealTime(*a)).collect(),
            Members::Circle(_) => Vec::new(),
        };
        c = c.witness(Witness::new("covering").elements(hits).label(format!(
            "every translate K+t inside the window meets the set, K span [{kmin}, {kmax}]"
        )));
    }
    Ok(c)
}

fn piecewise_syndetic(s: &WindowSet, params: &ClassParams, base: Certificate) -> Result<Certificate> {
    let (kmin, kmax) = params.compact.span();
    let len = params.run_length;
    if len > s.window.len() || len < kmax - kmin {
        return Ok(base.note("window shorter than the requested run"));
    }
    let Some(bad) = syndetic_failures(s, &params.compact)? else {
        return Ok(base.note("window shorter than the syndetic bound"));
    };
    // candidate run starts: members of the set
    let starts: Vec<f64> = match &s.members {
        Members::Integers(v) => v.iter().map(|&t| t as f64).collect(),
        Members::Intervals(v) => v.iter().map(|x| x.0).collect(),
        Members::Circle(_) => {
            return Err(ChaosError::usage("piecewise syndeticity is not defined for circle sets"))
        }
    };
    let found = starts.into_iter().find(|&p| {
        p + len <= s.window.hi
            && !bad
                .iter()
                .any(|&t| t + kmin >= p && t + kmax <= p + len)
    });
    let mut c = base.param("run_length", len);
    match found {
        Some(p) => {
            c.verdict = Verdict::Verified;
            c = c.witness(
                Witness::new("syndetic_run")
                    .element(times_of(s, p))
                    .label(format!("run [{p}, {}] has no gap wider than K", p + len)),
            );
        }
        None => {
            c.verdict = Verdict::Refuted;
            c = c.note("no run of the requested length with bounded gaps inside the window");
        }
    }
    Ok(c)
}

fn ip(s: &WindowSet, params: &ClassParams, base: Certificate) -> Result<Certificate> {
    let m = params.generators;
    if m == 0 {
        return Err(ChaosError::usage("IP check needs at least one generator"));
    }
    // candidate generators: positive members (intervals discretized)
    let (cands, scale): (Vec<i64>, f64) = match &s.members {
        Members::Integers(v) => (v.iter().copied().filter(|&t| t > 0).collect(), 1.0),
        Members::Intervals(v) => {
            let step = params.ip_step;
            let mut out = Vec::new();
            for (a, b) in v {
                let mut k = (a / step).ceil() as i64;
                while k as f64 * step <= *b {
                    if k > 0 {
                        out.push(k);
                    }
                    k += 1;
                }
            }
            (out, step)
        }
        Members::Circle(_) => return Err(ChaosError::usage("IP check needs real or integer times")),
    };
    let needed = (1i64 << m.min(62)) - 1;
    if (s.window.hi / scale) < needed as f64 {
        return Ok(base.param("generators", m).note("window too small to hold 2^m-1 distinct sums"));
    }
    let set: BTreeSet<i64> = cands.iter().copied().collect();
    let mut chosen = Vec::new();
    let mut sums = vec![0i64];
    let found = ip_search(&cands, &set, m, &mut chosen, &mut sums, 0);
    let mut c = base.param("generators", m);
    if found {
        c.verdict = Verdict::Verified;
        let gens = chosen.iter().map(|&k| times_of(s, k as f64 * scale));
        let all: Vec<f64> = sums.iter().skip(1).map(|&k| k as f64 * scale).collect();
        c = c.witness(
            Witness::new("ip_generators")
                .elements(gens)
                .label(format!("finite sums {all:?}")),
        );
    } else {
        c.verdict = Verdict::Refuted;
        c = c.note("no generator family with all distinct finite sums inside the window");
    }
    Ok(c)
}

fn ip_search(
    cands: &[i64],
    set: &BTreeSet<i64>,
    m: usize,
    chosen: &mut Vec<i64>,
    sums: &mut Vec<i64>,
    from: usize,
) -> bool {
    if chosen.len() == m {
        return true;
    }
    for (i, &g) in cands.iter().enumerate().skip(from) {
        let new: Vec<i64> = sums.iter().map(|s| s + g).collect();
        let existing: BTreeSet<i64> = sums.iter().copied().collect();
        let distinct = new.iter().all(|x| !existing.contains(x));
        if distinct && new.iter().all(|x| set.contains(x)) {
            let before = sums.len();
            sums.extend(new);
            chosen.push(g);
            if ip_search(cands, set, m, chosen, sums, i + 1) {
                return true;
            }
            chosen.pop();
            sums.truncate(before);
        }
    }
    false
}

/// Source of a hitting-time query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HitSource {
    Point(Point),
    Open(OpenSet),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingTimes {
    pub times: WindowSet,
    pub source: HitSource,
    pub target: OpenSet,
    /// Exact enumeration, or a grid scan that may miss times.
    pub exhaustive: bool,
}

/// Scan density for continuous hitting-time searches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    /// Grid points per unit of real time.
    pub density: usize,
    /// Sample points per side inside a source open set.
    pub samples: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            density: 1000,
            samples: 8,
        }
    }
}

/// `N(x, V)` or `N(U, V)` restricted to a window.
///
/// Shift cylinders are decided exactly by symbol compatibility. Float
/// spaces are scanned on a time grid; every reported time is re-checked by
/// acting on a sample point, so the result is a subset of the true set.
pub fn hitting_times(
    system: &DynamicalSystem,
    source: &HitSource,
    target: &OpenSet,
    window: TimeWindow,
    scan: ScanParams,
) -> Result<HittingTimes> {
    let times = hitting_scan(system, source, target, window, scan, false)?;
    let exhaustive = matches!(system.space(), SpaceKind::Shift { .. })
        || matches!(&system.space(), SpaceKind::Product { inner, .. } if matches!(**inner, SpaceKind::Shift { .. }))
        || (system.element_kind() == ElementKind::IntTime
            && matches!(source, HitSource::Point(_)));
    Ok(HittingTimes {
        times,
        source: source.clone(),
        target: target.clone(),
        exhaustive,
    })
}

/// Pattern compatibility: `σ^n[u] ∩ [v] ≠ ∅`.
pub fn patterns_hit(u: &[Option<u8>], v: &[Option<u8>], n: usize) -> bool {
    v.iter().enumerate().all(|(i, s)| match (s, u.get(n + i)) {
        (Some(a), Some(Some(b))) => a == b,
        _ => true,
    })
}

fn product_patterns(target: &OpenSet) -> Option<Vec<&[Option<u8>]>> {
    match target {
        OpenSet::Pattern(p) => Some(vec![p.as_slice()]),
        OpenSet::Product(parts) => parts.iter().map(|u| u.pattern()).collect(),
        _ => None,
    }
}

/// Core scan; `first_only` stops at the first hit.
pub(crate) fn hitting_scan(
    system: &DynamicalSystem,
    source: &HitSource,
    target: &OpenSet,
    window: TimeWindow,
    scan: ScanParams,
    first_only: bool,
) -> Result<WindowSet> {
    let space = system.space();
    let shift_len = match &space {
        SpaceKind::Shift { length, .. } => Some(*length),
        SpaceKind::Product { inner, .. } => match **inner {
            SpaceKind::Shift { length, .. } => Some(length),
            _ => None,
        },
        _ => None,
    };
    if let Some(len) = shift_len {
        let vs = product_patterns(target)
            .ok_or_else(|| ChaosError::usage("shift targets must be cylinders or patterns"))?;
        let need = vs.iter().map(|v| v.len()).max().unwrap_or(0);
        let mut hits = Vec::new();
        for n in window.int_range() {
            if n < 0 {
                continue;
            }
            let n_u = n as usize;
            if n_u + need > len {
                break;
            }
            let ok = match source {
                HitSource::Open(u) => {
                    let us = product_patterns(u).ok_or_else(|| {
                        ChaosError::usage("shift sources must be cylinders or patterns")
                    })?;
                    if us.len() != vs.len() {
                        return Err(ChaosError::usage("source and target arities differ"));
                    }
                    us.iter().zip(&vs).all(|(u, v)| patterns_hit(u, v, n_u))
                }
                HitSource::Point(p) => {
                    let moved = system.act(&GroupElement::IntTime(n), p)?;
                    target.contains(system, &moved)?
                }
            };
            if ok {
                hits.push(n);
                if first_only {
                    break;
                }
            }
        }
        return Ok(WindowSet::integers(window, hits));
    }

    match system.element_kind() {
        ElementKind::Mat2 => Err(ChaosError::usage(
            "matrix-time hitting sets are not scanned; use the closed-form transport",
        )),
        ElementKind::CircleExact => two_circle_hits(system, source, target, first_only),
        kind => {
            let samples = match source {
                HitSource::Point(p) => vec![p.clone()],
                HitSource::Open(u) => u.samples(system, scan.samples)?,
            };
            let times: Vec<f64> = match kind {
                ElementKind::IntTime => window.int_range().map(|n| n as f64).collect(),
                _ => {
                    let steps = (window.len() * scan.density as f64).round() as usize;
                    (0..=steps)
                        .map(|k| window.lo + k as f64 / scan.density as f64)
                        .collect()
                }
            };
            let step = 1.0 / scan.density as f64;
            let mut hits = Vec::new();
            for &t in &times {
                let g = match kind {
                    ElementKind::IntTime => GroupElement::IntTime(t as i64),
                    _ => GroupElement::RealTime(t),
                };
                let mut hit = false;
                for x in &samples {
                    if target.contains(system, &system.act(&g, x)?)? {
                        hit = true;
                        break;
                    }
                }
                if hit {
                    hits.push(t);
                    if first_only {
                        break;
                    }
                }
            }
            Ok(match kind {
                ElementKind::IntTime => WindowSet::integers(window, hits.iter().map(|&t| t as i64)),
                _ => {
                    // consecutive grid hits merge into one interval
                    let mut ivs: Vec<(f64, f64)> = Vec::new();
                    for t in hits {
                        match ivs.last_mut() {
                            Some(last) if t - last.1 <= step * 1.5 => last.1 = t,
                            _ => ivs.push((t, t)),
                        }
                    }
                    WindowSet::intervals(window, ivs)
                }
            })
        }
    }
}

/// Exact hitting elements between two-circle basis sets.
///
/// Candidate rotations align the centres and then nudge by fractions of the
/// radii; each candidate is confirmed by exhibiting a sample point of the
/// source that lands in the target.
fn two_circle_hits(
    system: &DynamicalSystem,
    source: &HitSource,
    target: &OpenSet,
    first_only: bool,
) -> Result<WindowSet> {
    let OpenSet::Basis(v) = target else {
        return Err(ChaosError::usage("two-circle targets must be basis sets"));
    };
    let (samples, src_center) = match source {
        HitSource::Point(p) => {
            let c = p.as_two_circle().cloned().ok_or_else(|| ChaosError::usage("expected a two-circle point"))?;
            (vec![p.clone()], c)
        }
        HitSource::Open(OpenSet::Basis(u)) => (
            OpenSet::Basis(u.clone()).samples(system, 4)?,
            u.center.clone(),
        ),
        _ => return Err(ChaosError::usage("two-circle sources must be points or basis sets")),
    };
    let base = &v.center.angle - &src_center.angle;
    let mut hits = Vec::new();
    for k in -4i64..=4 {
        let nudge = QSqrt2::rational(v.radius.clone() * num_rational::BigRational::new(k.into(), 8.into()));
        let t = GroupElement::circle(&base + &nudge);
        for x in &samples {
            let moved = system.act(&t, x)?;
            if target.contains(system, &moved)? {
                if let GroupElement::CircleExact(q) = &t {
                    if !hits.contains(q) {
                        hits.push(q.clone());
                    }
                }
                break;
            }
        }
        if first_only && !hits.is_empty() {
            break;
        }
    }
    hits.sort();
    Ok(WindowSet {
        kind: ElementKind::CircleExact,
        window: TimeWindow { lo: 0.0, hi: 1.0 },
        members: Members::Circle(hits),
    })
}

/// Templates for reference sequences `F_1 ⊂ F_2 ⊂ …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RefTemplate {
    /// `F_n = [-n, n]` (or `{-n..n}`).
    SymmetricInterval,
    /// `F_n = [0, n]` (or `{0..n}`).
    ForwardInterval,
    /// `F_n = {t : max |entry| ≤ n}` in `SL(2,R)`.
    MatrixNormBall,
    /// `F_n` listed explicitly; indices past the list reuse the last entry.
    Explicit(Vec<Vec<GroupElement>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSequence {
    pub kind: ElementKind,
    pub template: RefTemplate,
}

impl ReferenceSequence {
    pub fn name(&self) -> &'static str {
        match self.template {
            RefTemplate::SymmetricInterval => "symmetric",
            RefTemplate::ForwardInterval => "forward",
            RefTemplate::MatrixNormBall => "matnorm",
            RefTemplate::Explicit(_) => "explicit",
        }
    }

    /// Membership `t ∈ F_n` (`n ≥ 1`).
    pub fn contains(&self, n: usize, t: &GroupElement) -> bool {
        let n_f = n as f64;
        match (&self.template, t.base()) {
            (RefTemplate::SymmetricInterval, g) => g.as_time().is_some_and(|x| x.abs() <= n_f),
            (RefTemplate::ForwardInterval, g) => g.as_time().is_some_and(|x| (0.0..=n_f).contains(&x)),
            (RefTemplate::MatrixNormBall, GroupElement::Mat2(m)) => m.sup_norm() <= n_f,
            (RefTemplate::Explicit(lists), g) => {
                let idx = n.clamp(1, lists.len().max(1)) - 1;
                lists.get(idx).is_some_and(|l| l.iter().any(|e| e.base() == g))
            }
            _ => false,
        }
    }

    /// Real bounds of `F_n` for interval templates.
    pub fn bounds(&self, n: usize) -> Option<(f64, f64)> {
        let n = n as f64;
        match self.template {
            RefTemplate::SymmetricInterval => Some((-n, n)),
            RefTemplate::ForwardInterval => Some((0.0, n)),
            _ => None,
        }
    }
}

pub fn make_reference_sequence(kind: ElementKind, template: RefTemplate) -> Result<ReferenceSequence> {
    let ok = match (&template, kind) {
        (RefTemplate::SymmetricInterval | RefTemplate::ForwardInterval, ElementKind::RealTime | ElementKind::IntTime) => true,
        (RefTemplate::MatrixNormBall, ElementKind::Mat2) => true,
        (RefTemplate::Explicit(lists), k) => {
            if lists.is_empty() {
                return Err(ChaosError::usage("explicit reference sequence needs at least one set"));
            }
            if lists.iter().flatten().any(|e| e.kind() != k) {
                return Err(ChaosError::usage("explicit reference sets contain elements of another kind"));
            }
            for w in lists.windows(2) {
                if !w[0].iter().all(|e| w[1].contains(e)) {
                    return Err(ChaosError::usage("explicit reference sets must increase"));
                }
            }
            true
        }
        _ => false,
    };
    if !ok {
        return Err(ChaosError::usage(format!(
            "reference template {template:?} does not fit {} elements",
            kind.name()
        )));
    }
    Ok(ReferenceSequence { kind, template })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Mat2;
    use crate::open_set::OpenSet;
    use crate::space::Point;
    use crate::systems::{build_system, CatalogEntry};

    fn w(lo: f64, hi: f64) -> TimeWindow {
        TimeWindow::new(lo, hi).unwrap()
    }

    #[test]
    fn evens_are_syndetic() {
        let s = WindowSet::integers(w(0.0, 100.0), (0..=100).filter(|n| n % 2 == 0));
        let c = set_class_check(&s, SetClass::Syndetic, &ClassParams::with_compact(Compact::Finite(vec![0, 1]))).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        let c = set_class_check(&s, SetClass::Syndetic, &ClassParams::with_compact(Compact::Finite(vec![0]))).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
    }

    #[test]
    fn square_runs_are_thick() {
        let ivs = (0..=20).map(|n| ((n * n) as f64, (n * n + n) as f64));
        let s = WindowSet::intervals(w(0.0, 400.0), ivs);
        let c = set_class_check(&s, SetClass::Thick, &ClassParams::with_compact(Compact::Interval(0.0, 5.0))).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        assert_eq!(c.witnesses[0].elements, vec![GroupElement::RealTime(25.0)]);
        let c = set_class_check(&s, SetClass::Thick, &ClassParams::with_compact(Compact::Interval(0.0, 25.0))).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
    }

    #[test]
    fn ip_generators_are_powers_of_two() {
        let s = WindowSet::integers(w(0.0, 100.0), 1..=100);
        let c = set_class_check(&s, SetClass::Ip, &ClassParams::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        assert_eq!(
            c.witnesses[0].elements,
            vec![GroupElement::IntTime(1), GroupElement::IntTime(2), GroupElement::IntTime(4)]
        );
        let odd = WindowSet::integers(w(0.0, 100.0), (1..=100).filter(|n| n % 2 == 1));
        let c = set_class_check(&odd, SetClass::Ip, &ClassParams::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
        let tiny = WindowSet::integers(w(0.0, 5.0), 1..=5);
        let c = set_class_check(&tiny, SetClass::Ip, &ClassParams::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn piecewise_syndetic_runs() {
        // dense block [40, 60] inside an otherwise sparse set
        let s = WindowSet::integers(w(0.0, 100.0), (0..=100).filter(|n| (40..=60).contains(n) || n % 25 == 0));
        let params = ClassParams {
            compact: Compact::Finite(vec![0, 1]),
            run_length: 15.0,
            ..ClassParams::default()
        };
        let c = set_class_check(&s, SetClass::PiecewiseSyndetic, &params).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        let params = ClassParams { run_length: 30.0, ..params };
        let c = set_class_check(&s, SetClass::PiecewiseSyndetic, &params).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
    }

    #[test]
    fn empty_window_is_usage_error() {
        let s = WindowSet {
            kind: ElementKind::IntTime,
            window: TimeWindow { lo: 1.0, hi: 0.0 },
            members: Members::Integers(vec![]),
        };
        assert!(set_class_check(&s, SetClass::Thick, &ClassParams::default()).is_err());
    }

    #[test]
    fn shift_hitting_examples() {
        let shift = build_system(CatalogEntry::FullShift { alphabet: 2, length: 64 }).unwrap();
        let n = hitting_times(
            &shift,
            &HitSource::Open(OpenSet::cylinder(&[0])),
            &OpenSet::cylinder(&[1]),
            w(0.0, 10.0),
            ScanParams::default(),
        )
        .unwrap();
        assert_eq!(n.times.as_integers().unwrap(), (1..=10).collect::<Vec<_>>().as_slice());
        assert!(n.exhaustive);
        let n = hitting_times(
            &shift,
            &HitSource::Open(OpenSet::cylinder(&[0, 0])),
            &OpenSet::cylinder(&[1, 1]),
            w(0.0, 10.0),
            ScanParams::default(),
        )
        .unwrap();
        assert_eq!(n.times.as_integers().unwrap(), (2..=10).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn rotation_returns_to_point_neighbourhoods() {
        let alpha = std::f64::consts::SQRT_2 - 1.0;
        let rot = build_system(CatalogEntry::CircleRotation { alpha }).unwrap();
        let x = Point::circle(0.3);
        let eps = 0.05;
        let n = hitting_times(
            &rot,
            &HitSource::Point(x.clone()),
            &OpenSet::ball(x.clone(), eps),
            w(1.0, 200.0),
            ScanParams::default(),
        )
        .unwrap();
        let hits = n.times.as_integers().unwrap();
        assert!(!hits.is_empty());
        // bounded gaps at this scale
        let params = ClassParams::with_compact(Compact::Interval(0.0, (2.0 / eps).ceil()));
        let c = set_class_check(&n.times, SetClass::Syndetic, &params).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        for &t in hits {
            let y = rot.act(&GroupElement::IntTime(t), &x).unwrap();
            assert!(rot.distance(&x, &y).unwrap() < eps);
        }
    }

    #[test]
    fn reference_sequences() {
        let f = make_reference_sequence(ElementKind::RealTime, RefTemplate::ForwardInterval).unwrap();
        assert!(f.contains(3, &GroupElement::RealTime(2.5)));
        assert!(!f.contains(3, &GroupElement::RealTime(3.5)));
        let m = make_reference_sequence(ElementKind::Mat2, RefTemplate::MatrixNormBall).unwrap();
        for n in 1..30 {
            let next = GroupElement::Mat2(Mat2::separating((n + 1) as f64));
            assert!(!m.contains(n, &next));
        }
        let s = make_reference_sequence(ElementKind::IntTime, RefTemplate::SymmetricInterval).unwrap();
        for t in -2..=2 {
            assert!(s.contains(2, &GroupElement::IntTime(t)));
            assert!(s.contains(3, &GroupElement::IntTime(t)));
        }
        assert!(!s.contains(2, &GroupElement::IntTime(3)));
        assert!(make_reference_sequence(ElementKind::Mat2, RefTemplate::ForwardInterval).is_err());
        let bad = RefTemplate::Explicit(vec![vec![GroupElement::IntTime(1)], vec![GroupElement::IntTime(2)]]);
        assert!(make_reference_sequence(ElementKind::IntTime, bad).is_err());
    }
}
