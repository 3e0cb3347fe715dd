//! Topological dynamics of semigroup actions: windowed detectors for
//! transitivity, sensitivity, proximality and Li-Yorke chaos.

pub mod certificate;
pub mod detectors;
pub mod dynamics;
pub mod element;
pub mod error;
pub mod golden;
pub mod open_set;
pub mod qsqrt2;
pub mod scrambled;
pub mod sets;
pub mod space;
pub mod systems;

pub use certificate::{Certificate, Verdict, Witness};
pub use dynamics::{act, metric_distance, orbit_trace, product_system, sup_metric_estimate, DynamicalSystem};
pub use element::{ElementKind, GroupElement, Mat2};
pub use error::{ChaosError, Result};
pub use open_set::OpenSet;
pub use qsqrt2::QSqrt2;
pub use space::{ExtReal, Point, SpaceKind, TwoCircleNbhd, TwoCirclePoint, Word};
pub use systems::{build_system, CatalogEntry};
