//! Proximal, separated, Li-Yorke and asymptotic pairs relative to a
//! reference sequence, and the multi-dimensional tuple version.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::sensitivity::{normalizer, thin};
use super::{basis_radius, distance_bounds, echo_resolution, time_grid, Resolution};
use crate::certificate::{Certificate, Verdict, Witness};
use crate::dynamics::{product_system, DynamicalSystem};
use crate::element::{ElementKind, GroupElement, Mat2};
use crate::error::{ChaosError, Result};
use crate::qsqrt2::QSqrt2;
use crate::sets::{make_reference_sequence, RefTemplate, ReferenceSequence};
use crate::space::{same_point, signed_offset, ExtReal, Point, TwoCircleNbhd, TwoCirclePoint};
use crate::systems::{mobius_two_point, CatalogEntry};

const RECORD_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRelationKind {
    Proximal,
    Separated,
    LiYorke,
    Asymptotic,
}

impl PairRelationKind {
    pub fn name(self) -> &'static str {
        match self {
            PairRelationKind::Proximal => "proximal",
            PairRelationKind::Separated => "separated",
            PairRelationKind::LiYorke => "li_yorke",
            PairRelationKind::Asymptotic => "asymptotic",
        }
    }
}

/// `F_n = {0} ∪ {1/k : 2 ≤ k ≤ n+1}` on the circle group, listed up to `n_max`.
pub fn two_circle_refseq(n_max: usize) -> Result<ReferenceSequence> {
    let lists = (1..=n_max.max(1))
        .map(|n| {
            let mut v = vec![GroupElement::CircleExact(QSqrt2::zero())];
            v.extend((2..=n as i64 + 1).map(|k| GroupElement::circle(QSqrt2::from_ratios((1, k), (0, 1)))));
            v
        })
        .collect();
    make_reference_sequence(ElementKind::CircleExact, RefTemplate::Explicit(lists))
}

/// Candidate elements in the order used for limits: matrix families by
/// index, time kinds by `|t|`.
fn ordered_candidates(system: &DynamicalSystem, pts: &[Point], res: &Resolution) -> Result<Vec<GroupElement>> {
    let base = system.base();
    if let CatalogEntry::Mobius = base.entry() {
        let a = pts[0].as_ext_real().ok_or_else(|| ChaosError::usage("expected an extended real"))?;
        let b = pts[1].as_ext_real().ok_or_else(|| ChaosError::usage("expected an extended real"))?;
        let g = normalizer(a, b)?;
        let mut out: Vec<GroupElement> = (1..=res.max_steps)
            .map(|m| GroupElement::Mat2(Mat2::contracting(m as f64).mul(&g)))
            .collect();
        out.extend((1..=res.max_steps).map(|m| GroupElement::Mat2(Mat2::separating(m as f64).mul(&g))));
        if pts.len() == 2 {
            // hyperbolic elements fixing both points
            let h = mobius_two_point(a, b, ExtReal::Finite(0.0), ExtReal::Infinity)?;
            let hi = h.inverse();
            out.extend((1..=res.max_steps.min(200)).map(|m| {
                let l = 1.0 + m as f64;
                GroupElement::Mat2(hi.mul(&Mat2::new(l, 0.0, 0.0, 1.0 / l).expect("diagonal")).mul(&h))
            }));
        }
        return Ok(out);
    }
    let mut grid = time_grid(&base, res);
    grid.sort_by(|s, t| {
        let (a, b) = (s.as_time().unwrap_or(0.0), t.as_time().unwrap_or(0.0));
        a.abs().total_cmp(&b.abs()).then(a.total_cmp(&b))
    });
    Ok(grid)
}

fn wrap(system: &DynamicalSystem, t: &GroupElement) -> GroupElement {
    if system.is_product() {
        GroupElement::TupleTime(Box::new(t.base().clone()))
    } else {
        t.clone()
    }
}

struct Trace {
    t: GroupElement,
    lo: f64,
    hi: f64,
}

fn trace(system: &DynamicalSystem, x: &Point, y: &Point, cands: &[GroupElement]) -> Result<Vec<Trace>> {
    let space = system.space();
    cands
        .iter()
        .map(|t| {
            let t = wrap(system, t);
            let (lo, hi) = distance_bounds(&space, &system.act(&t, x)?, &system.act(&t, y)?)?;
            Ok(Trace { t, lo, hi })
        })
        .collect()
}

/// Record lows of the upper bounds: a monotone subsequence.
fn proximal_from_trace(name: &str, tr: &[Trace], res: &Resolution) -> Certificate {
    let eps = res.eps_min();
    let mut records: Vec<(usize, &Trace)> = Vec::new();
    for (i, r) in tr.iter().enumerate() {
        if records.last().map_or(true, |(_, b)| r.hi < b.hi) {
            records.push((i, r));
        }
    }
    let best = records.last().map(|(_, r)| r.hi).unwrap_or(f64::INFINITY);
    let mut w = Witness::new("proximal");
    let kept = thin_keep_last(&records, RECORD_CAP);
    for (i, r) in &kept {
        w = w.element(r.t.clone()).distance(r.hi).label(format!("index={}", i + 1));
    }
    if let Some((i, _)) = records.last() {
        w = w.at(i + 1);
    }
    let half = tr.len() / 2;
    let head = tr[..half].iter().map(|r| r.hi).fold(f64::INFINITY, f64::min);
    let tail = tr[half..].iter().map(|r| r.hi).fold(f64::INFINITY, f64::min);
    let (verdict, note) = if best < eps {
        (Verdict::Verified, format!("record lows fall to {best:e} < {eps}"))
    } else if tail >= head {
        (Verdict::Refuted, format!("no progress: distances stay >= {best} > {eps} across the window"))
    } else {
        (Verdict::Inconclusive, format!("distances decrease to {best} but not below {eps}; limiting parameter: time_window"))
    };
    Certificate::new(name, "proximal", verdict).param("min_distance", best).witness(w).note(note)
}

fn thin_keep_last<T: Clone>(v: &[T], cap: usize) -> Vec<T> {
    if v.len() <= cap {
        return v.to_vec();
    }
    let mut out = thin(&v[..v.len() - 1], cap - 1);
    out.push(v[v.len() - 1].clone());
    out
}

/// For each `n ≤ horizon`, the best admissible `s ∉ F_n`.
fn separated_from_trace(name: &str, tr: &[Trace], refseq: &ReferenceSequence, res: &Resolution) -> Certificate {
    let mut w = Witness::new("separation");
    let mut constant = f64::INFINITY;
    for n in 1..=res.horizon_index {
        let best = tr
            .iter()
            .filter(|r| !refseq.contains(n, &r.t))
            .max_by(|a, b| a.lo.total_cmp(&b.lo));
        let Some(best) = best else {
            return Certificate::new(name, "separated", Verdict::Inconclusive)
                .witness(w)
                .note(format!("no admissible element outside F_{n} in the window; limiting parameter: time_window"));
        };
        constant = constant.min(best.lo);
        w = w.element(best.t.clone()).distance(best.lo);
        if best.lo <= res.eps_min() {
            return Certificate::new(name, "separated", Verdict::Refuted)
                .param("separation_constant", constant)
                .witness(w.at(n))
                .note(format!(
                    "every admissible element outside F_{n} brings the pair within {} <= {}",
                    best.lo,
                    res.eps_min()
                ));
        }
    }
    let w = w.at(res.horizon_index);
    match res.largest_below(constant) {
        Some(e) => Certificate::new(name, "separated", Verdict::Verified)
            .param("separation_constant", constant)
            .param("separation_epsilon", e)
            .witness(w),
        None => Certificate::new(name, "separated", Verdict::Inconclusive)
            .param("separation_constant", constant)
            .witness(w)
            .note("separation does not clear any grid radius"),
    }
}

fn asymptotic_from_trace(name: &str, tr: &[Trace], res: &Resolution) -> Certificate {
    let start = tr.len() * 3 / 4;
    let tail = &tr[start..];
    let worst_hi = tail.iter().map(|r| r.hi).fold(0.0, f64::max);
    let worst_lo = tail.iter().map(|r| r.lo).fold(0.0, f64::max);
    let verdict = if worst_hi < res.eps_min() {
        Verdict::Verified
    } else if worst_lo >= res.eps_max() {
        Verdict::Refuted
    } else {
        Verdict::Inconclusive
    };
    let mut w = Witness::new("tail");
    if let Some(r) = tail.iter().max_by(|a, b| a.hi.total_cmp(&b.hi)) {
        w = w.element(r.t.clone()).distance(r.hi);
    }
    Certificate::new(name, "asymptotic", verdict)
        .param("tail_sup", worst_hi)
        .witness(w)
        .note("tail is the last quarter of the ordered candidates")
}

pub fn pair_relation(
    system: &DynamicalSystem,
    x: &Point,
    y: &Point,
    kind: PairRelationKind,
    refseq: &ReferenceSequence,
    res: &Resolution,
) -> Result<Certificate> {
    res.validate()?;
    let space = system.space();
    space.check(x)?;
    space.check(y)?;
    if same_point(&space, x, y, 0.0) {
        return Err(ChaosError::usage("pair relation needs distinct points"));
    }
    if refseq.kind != system.element_kind() {
        return Err(ChaosError::usage("reference sequence kind differs from the system's time"));
    }
    let cert = if let CatalogEntry::TwoCircle = system.entry() {
        two_circle_pair(system, x, y, kind, refseq, res)?
    } else {
        system.require_metric()?;
        let cands = ordered_candidates(system, &[x.clone(), y.clone()], res)?;
        let tr = trace(system, x, y, &cands)?;
        let name = system.name();
        match kind {
            PairRelationKind::Proximal => proximal_from_trace(&name, &tr, res),
            PairRelationKind::Separated => separated_from_trace(&name, &tr, refseq, res),
            PairRelationKind::Asymptotic => asymptotic_from_trace(&name, &tr, res),
            PairRelationKind::LiYorke => {
                let p = proximal_from_trace(&name, &tr, res);
                let s = separated_from_trace(&name, &tr, refseq, res);
                conjunction(&name, p, s)
            }
        }
    };
    let mut cert = cert
        .param("x", x.to_string())
        .param("y", y.to_string())
        .param("refseq", refseq.name())
        .param("horizon", res.horizon_index)
        .with_resolution(&echo_resolution(res))
        .with_seed(res.seed);
    cert.property = kind.name().into();
    Ok(cert)
}

fn conjunction(name: &str, p: Certificate, s: Certificate) -> Certificate {
    let mut c = Certificate::new(name, "li_yorke", p.verdict.and(s.verdict));
    for (k, v) in p.parameters.iter().chain(s.parameters.iter()) {
        c.parameters.insert(k.clone(), v.clone());
    }
    c.witnesses.extend(p.witnesses.iter().cloned());
    c.witnesses.extend(s.witnesses.iter().cloned());
    c.notes.extend(p.notes.iter().cloned());
    c.notes.extend(s.notes.iter().cloned());
    c.part(p).part(s)
}

fn basis(center: &TwoCirclePoint, r: &BigRational) -> Result<TwoCircleNbhd> {
    TwoCircleNbhd::new(center.clone(), r.clone())
}

/// Basis semantics on the two-circle space.
///
/// Proximal: both images lie in one basis set of a shrinking radius.
/// Separated: along `s_n ∉ F_n`, neither image lies in the basis set of
/// the other's image at a fixed radius.
fn two_circle_pair(
    system: &DynamicalSystem,
    x: &Point,
    y: &Point,
    kind: PairRelationKind,
    refseq: &ReferenceSequence,
    res: &Resolution,
) -> Result<Certificate> {
    let (Some(px), Some(py)) = (x.as_two_circle(), y.as_two_circle()) else {
        return Err(ChaosError::usage("expected two-circle points"));
    };
    let name = system.name();
    let radii: Vec<BigRational> = res.epsilon_grid.iter().filter_map(|e| basis_radius(*e)).collect();
    if radii.is_empty() {
        return Err(ChaosError::usage("epsilon grid has no radius below 1/2"));
    }
    let offset = signed_offset(&py.angle, &px.angle);
    let proximal = || -> Result<Certificate> {
        if !offset.is_zero() {
            let gap = offset.abs();
            return Ok(match radii.iter().find(|r| QSqrt2::rational((*r).clone()) < gap) {
                Some(r) => Certificate::new(&name, "proximal", Verdict::Refuted)
                    .witness(Witness::new("angular_gap").label(format!("offset {gap} exceeds the diameter {r} of every radius-{r} basis set")))
                    .note("rotations preserve the angular offset"),
                None => Certificate::new(&name, "proximal", Verdict::Inconclusive).note("offset below every grid radius"),
            });
        }
        // same angle, different levels: t = (r/2)√2 ∈ (0, r)
        let mut w = Witness::new("proximal");
        let mut r = radii.clone();
        while r.len() < 12 {
            let last = r.last().expect("nonempty").clone();
            r.push(last / BigRational::from_integer(2.into()));
        }
        let center = TwoCirclePoint::new(px.angle.clone(), 0)?;
        for rad in &r {
            let t = GroupElement::circle(QSqrt2::new(BigRational::from_integer(0.into()), rad.clone() / BigRational::from_integer(2.into())));
            let n = basis(&center, rad)?;
            let a = system.act(&t, x)?;
            let b = system.act(&t, y)?;
            let ok = matches!((&a, &b), (Point::TwoCircle(qa), Point::TwoCircle(qb)) if n.contains(qa) && n.contains(qb));
            if !ok {
                return Ok(Certificate::new(&name, "proximal", Verdict::Inconclusive).note("construction failed"));
            }
            w = w.element(t).points([a, b]).label(format!("N_{}({center})", crate::qsqrt2::QSqrt2::rational(rad.clone())));
        }
        Ok(Certificate::new(&name, "proximal", Verdict::Verified)
            .witness(w)
            .note("irrational rotations t in (0, r) put both images in N_r(y,0) for every radius r"))
    };
    let separated = || -> Result<Certificate> {
        // largest radius with mutual non-membership (rotation invariant)
        let sep = radii.iter().find(|r| {
            let nx = TwoCircleNbhd { center: px.clone(), radius: (*r).clone() };
            let ny = TwoCircleNbhd { center: py.clone(), radius: (*r).clone() };
            !nx.contains(py) && !ny.contains(px)
        });
        let Some(r) = sep else {
            return Ok(Certificate::new(&name, "separated", Verdict::Refuted)
                .note("every grid basis set of one point contains the other; rotations preserve this"));
        };
        let mut w = Witness::new("separation");
        for n in 1..=res.horizon_index {
            let s = (1..).map(|k| GroupElement::circle(QSqrt2::from_ratios((0, 1), (1, (n + k + 1) as i64))))
                .take(64)
                .find(|s| !refseq.contains(n, s));
            let Some(s) = s else {
                return Ok(Certificate::new(&name, "separated", Verdict::Inconclusive).note(format!("no element outside F_{n} found")));
            };
            let a = system.act(&s, x)?;
            let b = system.act(&s, y)?;
            let (Point::TwoCircle(qa), Point::TwoCircle(qb)) = (&a, &b) else { unreachable!() };
            let na = basis(qa, r)?;
            let nb = basis(qb, r)?;
            if na.contains(qb) || nb.contains(qa) {
                return Ok(Certificate::new(&name, "separated", Verdict::Inconclusive).note("construction failed"));
            }
            w = w.element(s).points([a, b]);
        }
        Ok(Certificate::new(&name, "separated", Verdict::Verified)
            .param("separation_radius", crate::qsqrt2::QSqrt2::rational(r.clone()).to_string())
            .witness(w.at(res.horizon_index)))
    };
    Ok(match kind {
        PairRelationKind::Proximal => proximal()?,
        PairRelationKind::Separated => separated()?,
        PairRelationKind::LiYorke => conjunction(&name, proximal()?, separated()?),
        PairRelationKind::Asymptotic => return Err(ChaosError::UnsupportedMetric("two_circle")),
    })
}

/// Prescribed witness times for a tuple, e.g. from a scrambled family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleSchedule {
    pub returns: Vec<GroupElement>,
    pub collapses: Vec<GroupElement>,
    /// Collapse target; the image of the first point when absent.
    pub target: Option<Point>,
}

pub fn detect_multidim_tuple(
    system: &DynamicalSystem,
    points: &[Point],
    refseq: &ReferenceSequence,
    res: &Resolution,
) -> Result<Certificate> {
    multidim_with_schedule(system, points, refseq, res, None)
}

pub fn multidim_with_schedule(
    system: &DynamicalSystem,
    points: &[Point],
    refseq: &ReferenceSequence,
    res: &Resolution,
    schedule: Option<&TupleSchedule>,
) -> Result<Certificate> {
    res.validate()?;
    let k = points.len();
    if k < 2 {
        return Err(ChaosError::usage("tuples need at least two points"));
    }
    system.require_metric()?;
    let space = system.space();
    for p in points {
        space.check(p)?;
    }
    for i in 0..k {
        for j in (i + 1)..k {
            if same_point(&space, &points[i], &points[j], 0.0) {
                return Err(ChaosError::usage(format!("points {i} and {j} coincide")));
            }
        }
    }
    if refseq.kind != system.element_kind() {
        return Err(ChaosError::usage("reference sequence kind differs from the system's time"));
    }
    let prod = product_system(system, k)?;
    let pspace = prod.space();
    let tuple = Point::Tuple(points.to_vec());
    let (returns, collapses) = match schedule {
        Some(s) => (s.returns.clone(), s.collapses.clone()),
        None => {
            let c = ordered_candidates(system, points, res)?;
            (c.clone(), c)
        }
    };
    if returns.is_empty() && collapses.is_empty() {
        return Ok(Certificate::new(prod.name(), "multidim_li_yorke", Verdict::Inconclusive).note("empty schedule: no witnesses"));
    }
    let name = prod.name();

    // return direction: s_n ∉ F_n with s_n·X close to X
    let mut ret_w = Witness::new("return");
    let mut ret_verdict = Verdict::Verified;
    let mut ret_note = None;
    let mut ret_dist = Vec::with_capacity(returns.len());
    for s in &returns {
        let moved = prod.act(&wrap(&prod, s), &tuple)?;
        ret_dist.push(distance_bounds(&pspace, &moved, &tuple)?.1);
    }
    for n in 1..=res.horizon_index {
        let best = returns
            .iter()
            .zip(&ret_dist)
            .filter(|(s, _)| !refseq.contains(n, s))
            .min_by(|a, b| a.1.total_cmp(b.1));
        match best {
            None => {
                ret_verdict = Verdict::Inconclusive;
                ret_note = Some(format!("no return candidate outside F_{n}"));
                break;
            }
            Some((s, d)) => {
                ret_w = ret_w.element(s.clone()).distance(*d);
                if *d >= res.eps_min() {
                    ret_verdict = Verdict::Refuted;
                    ret_note = Some(format!("no admissible element outside F_{n} returns the tuple within {}", res.eps_min()));
                    ret_w = ret_w.at(n);
                    break;
                }
            }
        }
    }
    let mut ret = Certificate::new(&name, "multidim_return", ret_verdict).witness(ret_w);
    if let Some(n) = ret_note {
        ret = ret.note(n);
    }

    // collapse direction: t_n·X approaching the diagonal
    let mut rec: Vec<(GroupElement, f64, Point)> = Vec::new();
    let mut all = Vec::with_capacity(collapses.len());
    for t in &collapses {
        let moved = prod.act(&wrap(&prod, t), &tuple)?;
        let comps = moved.components().expect("tuple").to_vec();
        let p = match schedule.and_then(|s| s.target.clone()) {
            Some(p) => p,
            None => comps[0].clone(),
        };
        let mut d = 0.0f64;
        for c in &comps {
            d = d.max(distance_bounds(&space, c, &p)?.1);
        }
        all.push(d);
        if rec.last().map_or(true, |r| d < r.1) {
            rec.push((t.clone(), d, p));
        }
    }
    let best = rec.last().map(|r| r.1).unwrap_or(f64::INFINITY);
    let half = all.len() / 2;
    let head = all[..half].iter().copied().fold(f64::INFINITY, f64::min);
    let tail = all[half..].iter().copied().fold(f64::INFINITY, f64::min);
    let col_verdict = if best < res.eps_min() {
        Verdict::Verified
    } else if tail >= head || all.len() < 2 {
        Verdict::Refuted
    } else {
        Verdict::Inconclusive
    };
    let mut col_w = Witness::new("collapse");
    for (t, d, _) in thin_keep_last(&rec, RECORD_CAP) {
        col_w = col_w.element(t).distance(d);
    }
    if let Some((_, _, p)) = rec.last() {
        col_w = col_w.point(p.clone());
    }
    let col = Certificate::new(&name, "multidim_collapse", col_verdict)
        .param("collapse_distance", best)
        .witness(col_w);

    let mut cert = Certificate::new(&name, "multidim_li_yorke", ret.verdict.and(col.verdict))
        .param("k", k)
        .param("refseq", refseq.name())
        .param("horizon", res.horizon_index);
    cert.witnesses.extend(ret.witnesses.iter().cloned());
    cert.witnesses.extend(col.witnesses.iter().cloned());
    Ok(cert
        .part(ret)
        .part(col)
        .with_resolution(&echo_resolution(res))
        .with_seed(res.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Word;
    use crate::systems::build_system;

    #[test]
    fn mobius_pair_is_li_yorke() {
        let m = build_system(CatalogEntry::Mobius).unwrap();
        let res = Resolution::for_system(&m);
        let f = make_reference_sequence(ElementKind::Mat2, RefTemplate::MatrixNormBall).unwrap();
        let c = pair_relation(&m, &Point::real(0.0), &Point::real(1.0), PairRelationKind::LiYorke, &f, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        assert!(c.parameter_f64("separation_constant").unwrap() > 0.99);
        assert!(c.parameter_f64("min_distance").unwrap() < 1e-6);
        let back = pair_relation(&m, &Point::real(1.0), &Point::real(0.0), PairRelationKind::LiYorke, &f, &res).unwrap();
        assert_eq!(back.verdict, Verdict::Verified);
    }

    #[test]
    fn two_circle_level_pair() {
        let tc = build_system(CatalogEntry::TwoCircle).unwrap();
        let res = Resolution::for_system(&tc).with_horizon(10);
        let f = two_circle_refseq(10).unwrap();
        let y = QSqrt2::from_ratios((1, 3), (0, 1));
        let a = Point::TwoCircle(TwoCirclePoint::new(y.clone(), 0).unwrap());
        let b = Point::TwoCircle(TwoCirclePoint::new(y, 1).unwrap());
        let c = pair_relation(&tc, &a, &b, PairRelationKind::LiYorke, &f, &res).unwrap();
        assert_eq!(c.verdict, Verdict::Verified, "{:?}", c.notes);
        for t in &c.witnesses_of("proximal").next().unwrap().elements {
            let GroupElement::CircleExact(q) = t else { panic!() };
            assert!(!q.is_rational());
        }
    }

    #[test]
    fn period_two_tuple() {
        let shift = build_system(CatalogEntry::FullShift { alphabet: 2, length: 64 }).unwrap();
        let res = Resolution::for_system(&shift).with_window(0.0, 63.0).with_horizon(8);
        let f = make_reference_sequence(ElementKind::IntTime, RefTemplate::ForwardInterval).unwrap();
        let x = Point::Word(Word::periodic(2, &[0, 1], 64).unwrap());
        let sx = Point::Word(Word::periodic(2, &[1, 0], 64).unwrap());
        let c = detect_multidim_tuple(&shift, &[x, sx], &f, &res).unwrap();
        assert_eq!(c.parts[0].verdict, Verdict::Verified);
        // the components always differ at index 0, so the tuple never collapses
        assert_eq!(c.parts[1].verdict, Verdict::Refuted);
    }
}
