//! Resolution-parameterized detectors. Every unbounded quantifier in a
//! dynamical definition is replaced by a finite grid: test points, test open
//! sets, a time window and a horizon for reference-sequence indices.

mod devaney;
mod filter;
mod hits;
mod pairs;
mod points;
mod sensitivity;
mod transitivity;

use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicalSystem;
use crate::element::{ElementKind, GroupElement};
use crate::error::{ChaosError, Result};
use crate::open_set::OpenSet;
use crate::qsqrt2::QSqrt2;
use crate::sets::TimeWindow;
use crate::space::{ExtReal, Point, SpaceKind, TwoCircleNbhd, TwoCirclePoint, Word};
use crate::systems::CatalogEntry;

pub use devaney::devaney_check;
pub use filter::{furstenberg_filter_check, stable_set_probe};
pub use hits::{hit_witness, point_hits, set_hits};
pub use pairs::{detect_multidim_tuple, multidim_with_schedule, pair_relation, two_circle_refseq, PairRelationKind, TupleSchedule};
pub use points::{classify_point, classify_point_with, default_refseq, transitive_word, PointKind};
pub use sensitivity::detect_sensitivity;
pub use transitivity::{de_bruijn, detect_minimality, detect_transitivity, TransitivityKind};

/// Default radii, largest first.
pub const DEFAULT_EPSILON_GRID: [f64; 5] = [0.5, 0.25, 0.1, 0.05, 0.01];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Metric radii, sorted descending.
    pub epsilon_grid: Vec<f64>,
    /// Grid centers per space unit, or cylinder depth on the shift.
    pub space_grid: usize,
    pub time_window: TimeWindow,
    /// Grid points per unit of real time.
    pub time_density: usize,
    /// Largest reference-sequence index examined.
    pub horizon_index: usize,
    /// Length of generated matrix families.
    pub max_steps: usize,
    pub seed: u64,
}

impl Resolution {
    /// Defaults sized for the system: group actions get a symmetric window,
    /// the shift gets `[0, min(32, L-1)]` and depth 4.
    pub fn for_system(system: &DynamicalSystem) -> Resolution {
        let (space_grid, window) = match system.entry() {
            CatalogEntry::FullShift { length, .. } => {
                (4, TimeWindow { lo: 0.0, hi: 32f64.min(*length as f64 - 1.0) })
            }
            CatalogEntry::IntegerTranslation => (4, TimeWindow { lo: -100.0, hi: 100.0 }),
            _ => (4, TimeWindow { lo: -100.0, hi: 100.0 }),
        };
        Resolution {
            epsilon_grid: DEFAULT_EPSILON_GRID.to_vec(),
            space_grid,
            time_window: window,
            time_density: 100,
            horizon_index: 50,
            max_steps: 2000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon_grid.is_empty() || self.epsilon_grid.iter().any(|e| !(*e > 0.0)) {
            return Err(ChaosError::usage("epsilon grid must be nonempty and positive"));
        }
        if self.epsilon_grid.windows(2).any(|w| w[0] < w[1]) {
            return Err(ChaosError::usage("epsilon grid must be sorted descending"));
        }
        if self.space_grid == 0 || self.time_density == 0 || self.horizon_index == 0 || self.max_steps == 0 {
            return Err(ChaosError::usage("resolution counts must be positive"));
        }
        if self.time_window.hi < self.time_window.lo {
            return Err(ChaosError::usage("time window is empty"));
        }
        Ok(())
    }

    pub fn eps_min(&self) -> f64 {
        *self.epsilon_grid.last().expect("validated grid")
    }

    pub fn eps_max(&self) -> f64 {
        self.epsilon_grid[0]
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Self {
        self.time_window = TimeWindow { lo, hi };
        self
    }

    pub fn with_horizon(mut self, n: usize) -> Self {
        self.horizon_index = n;
        self
    }

    pub fn with_space_grid(mut self, g: usize) -> Self {
        self.space_grid = g;
        self
    }

    pub fn with_density(mut self, d: usize) -> Self {
        self.time_density = d;
        self
    }

    pub fn with_epsilons(mut self, grid: Vec<f64>) -> Self {
        self.epsilon_grid = grid;
        self
    }

    /// Largest grid value strictly below `d`.
    pub fn largest_below(&self, d: f64) -> Option<f64> {
        self.epsilon_grid.iter().copied().find(|e| *e < d)
    }

    /// Bound `K = [0, b]` used for syndetic/thick tests inside the window.
    pub fn gap_bound(&self) -> f64 {
        (self.time_window.hi - self.time_window.lo) / 4.0
    }
}

/// Radius as an exact rational with denominator 1000; `None` when it is not
/// a valid basis radius.
pub(crate) fn basis_radius(eps: f64) -> Option<num_rational::BigRational> {
    let num = (eps * 1000.0).round() as i64;
    if num <= 0 || num >= 500 {
        return None;
    }
    Some(num_rational::BigRational::new(num.into(), 1000.into()))
}

/// Grid centers of the phase space.
pub fn grid_points(system: &DynamicalSystem, res: &Resolution) -> Result<Vec<Point>> {
    let g = res.space_grid;
    let pts = match system.entry() {
        CatalogEntry::TranslationFlow | CatalogEntry::Mobius => {
            let n = 2 * g;
            (0..n)
                .map(|k| {
                    let phi = std::f64::consts::PI * k as f64 / n as f64;
                    if 2 * k == n {
                        Point::infinity()
                    } else {
                        Point::ProjReal(ExtReal::Finite(clean(phi.tan())))
                    }
                })
                .collect()
        }
        CatalogEntry::IntegerTranslation => {
            let g = g as i64;
            let mut v: Vec<Point> = (-g..=g).map(|k| Point::real(k as f64)).collect();
            v.push(Point::infinity());
            v
        }
        CatalogEntry::CircleRotation { .. } => (0..g).map(|k| Point::circle(k as f64 / g as f64)).collect(),
        CatalogEntry::FullShift { alphabet, length } => {
            let d = g.min(*length);
            let mut out = Vec::new();
            for code in 0..(*alphabet as usize).pow(d as u32) {
                let mut w = Word::zeros(*alphabet, *length);
                let mut c = code;
                for i in (0..d).rev() {
                    w.symbols[i] = (c % *alphabet as usize) as u8;
                    c /= *alphabet as usize;
                }
                out.push(Point::Word(w));
            }
            out
        }
        CatalogEntry::TwoCircle => {
            let mut out = Vec::new();
            for k in 0..g {
                for level in 0..=1 {
                    let angle = QSqrt2::from_ratios((k as i64, g as i64), (0, 1));
                    out.push(Point::TwoCircle(TwoCirclePoint::new(angle, level)?));
                }
            }
            out
        }
    };
    if system.is_product() {
        // diagonal points plus one off-diagonal shift per center
        let k = system.arity();
        let n = pts.len();
        let mut out = Vec::new();
        for i in 0..n {
            out.push(Point::Tuple(vec![pts[i].clone(); k]));
            let mut t = vec![pts[i].clone(); k];
            t[k - 1] = pts[(i + n / 2) % n].clone();
            out.push(Point::Tuple(t));
        }
        return Ok(out);
    }
    Ok(pts)
}

/// Rounds tiny float noise of `tan` at grid angles.
fn clean(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-12 {
        r
    } else {
        x
    }
}

/// The finite family of test open sets of a catalog (non-product) system.
///
/// Balls at grid centers with every grid radius; all cylinders of depth
/// `1..=space_grid` on the shift; basis sets on the two-circle space.
pub fn test_sets(system: &DynamicalSystem, res: &Resolution) -> Result<Vec<OpenSet>> {
    if system.is_product() {
        return Err(ChaosError::usage("test sets are built from the factor system"));
    }
    match system.entry() {
        CatalogEntry::FullShift { alphabet, length } => {
            let mut out = Vec::new();
            for d in 1..=res.space_grid.min(*length) {
                out.extend(cylinders(*alphabet, d));
            }
            Ok(out)
        }
        CatalogEntry::TwoCircle => {
            let mut out = Vec::new();
            for p in grid_points(system, res)? {
                let c = p.as_two_circle().cloned().expect("two-circle grid");
                for eps in &res.epsilon_grid {
                    if let Some(r) = basis_radius(*eps) {
                        out.push(OpenSet::Basis(TwoCircleNbhd::new(c.clone(), r)?));
                    }
                }
            }
            Ok(out)
        }
        _ => {
            let mut out = Vec::new();
            for p in grid_points(system, res)? {
                for eps in &res.epsilon_grid {
                    out.push(OpenSet::ball(p.clone(), *eps));
                }
            }
            Ok(out)
        }
    }
}

/// All cylinders of exactly depth `d`, in lexicographic order.
pub fn cylinders(alphabet: u8, d: usize) -> Vec<OpenSet> {
    let a = alphabet as usize;
    (0..a.pow(d as u32))
        .map(|mut code| {
            let mut u = vec![0u8; d];
            for i in (0..d).rev() {
                u[i] = (code % a) as u8;
                code /= a;
            }
            OpenSet::cylinder(&u)
        })
        .collect()
}

/// Candidate times of the window, in increasing order.
pub(crate) fn time_grid(system: &DynamicalSystem, res: &Resolution) -> Vec<GroupElement> {
    let w = res.time_window;
    match (system.element_kind(), system.entry()) {
        (ElementKind::IntTime, CatalogEntry::FullShift { length, .. }) => {
            let lo = w.lo.ceil().max(0.0) as i64;
            let hi = (w.hi.floor() as i64).min(*length as i64 - 1);
            (lo..=hi).map(GroupElement::IntTime).collect()
        }
        (ElementKind::IntTime, _) => w.int_range().map(GroupElement::IntTime).collect(),
        (ElementKind::RealTime, _) => {
            let steps = ((w.hi - w.lo) * res.time_density as f64).round() as usize;
            (0..=steps)
                .map(|k| GroupElement::RealTime(w.lo + k as f64 / res.time_density as f64))
                .collect()
        }
        _ => Vec::new(),
    }
}

/// Interval `[lo, hi]` bounding the true distance between two points.
///
/// Exact for float spaces. Truncated words that agree on their common
/// length `c` are only known to be within `2^-c`.
pub(crate) fn distance_bounds(space: &SpaceKind, p: &Point, q: &Point) -> Result<(f64, f64)> {
    match (space, p, q) {
        (SpaceKind::Shift { .. }, Point::Word(a), Point::Word(b)) => Ok(match a.first_difference(b) {
            Some(k) => {
                let d = 0.5f64.powi(k as i32);
                (d, d)
            }
            None => (0.0, 0.5f64.powi(a.len().min(b.len()) as i32)),
        }),
        (SpaceKind::Product { inner, .. }, Point::Tuple(a), Point::Tuple(b)) if a.len() == b.len() => {
            let mut lo = 0.0f64;
            let mut hi = 0.0f64;
            for (x, y) in a.iter().zip(b) {
                let (l, h) = distance_bounds(inner, x, y)?;
                lo = lo.max(l);
                hi = hi.max(h);
            }
            Ok((lo, hi))
        }
        _ => {
            let d = space.distance(p, q)?;
            Ok((d, d))
        }
    }
}

pub(crate) fn echo_resolution(res: &Resolution) -> serde_json::Value {
    serde_json::to_value(res).unwrap_or(serde_json::Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::build_system;

    #[test]
    fn grid_and_tests() {
        let flow = build_system(CatalogEntry::TranslationFlow).unwrap();
        let res = Resolution::for_system(&flow);
        let pts = grid_points(&flow, &res).unwrap();
        assert_eq!(pts.len(), 8);
        assert!(pts.contains(&Point::infinity()));
        assert!(pts.contains(&Point::real(0.0)));
        assert!(pts.contains(&Point::real(1.0)));
        assert_eq!(test_sets(&flow, &res).unwrap().len(), 40);

        let shift = build_system(CatalogEntry::FullShift { alphabet: 2, length: 64 }).unwrap();
        let res = Resolution::for_system(&shift);
        assert_eq!(test_sets(&shift, &res).unwrap().len(), 2 + 4 + 8 + 16);
        assert_eq!(grid_points(&shift, &res).unwrap().len(), 16);
        assert_eq!(time_grid(&shift, &res).len(), 33);

        let tc = build_system(CatalogEntry::TwoCircle).unwrap();
        let res = Resolution::for_system(&tc);
        // radius 0.5 is not a basis radius
        assert_eq!(test_sets(&tc, &res).unwrap().len(), 8 * 4);
    }

    #[test]
    fn resolution_validation() {
        let flow = build_system(CatalogEntry::TranslationFlow).unwrap();
        let res = Resolution::for_system(&flow);
        assert!(res.validate().is_ok());
        assert!(res.clone().with_epsilons(vec![0.1, 0.5]).validate().is_err());
        assert!(res.clone().with_epsilons(vec![]).validate().is_err());
        assert_eq!(res.largest_below(0.3), Some(0.25));
        assert_eq!(res.largest_below(0.01), None);
    }

    #[test]
    fn truncated_word_bounds() {
        let space = SpaceKind::Shift { alphabet: 2, length: 8 };
        let a = Point::Word(Word::zeros(2, 8));
        let b = Point::Word(Word::zeros(2, 3));
        assert_eq!(distance_bounds(&space, &a, &b).unwrap(), (0.0, 0.125));
    }
}
