//! Exact enumerative counts for rational, nodal and fixed-j elliptic curves
//! in `P^r`, `2 <= r <= 5`.

pub mod cache;
pub mod chow_blowup;
pub mod constraints;
pub mod engine;
mod gw_rational;
pub mod nodal;
pub mod rr2;
pub mod special_tangent;
pub mod tables;
pub mod linalg;
pub mod scalar;

#[cfg(test)]
mod property_tests;

pub use chow_blowup::BlowupClass;
pub use engine::{Engine, EngineError, EngineResult, Selection};
pub use constraints::{Constraint, FamilyHandle, RawConstraint};
pub use scalar::{Count, Scalar};

/// Exact classes in the blowup ring.
pub type ExactClass = BlowupClass<Count>;
/// Floating-point classes, for quick numerical checks.
pub type FloatClass = BlowupClass<f64>;
