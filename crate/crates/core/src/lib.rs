//! Exact symbolic and numeric tools for plurisubharmonic defining functions.
//!
//! Given a polynomial defining function `r = Im w + F` of a pseudoconvex
//! domain, the crate computes Levi forms and complex Hessian minors exactly,
//! decides (three-valuedly) whether quantities are dominated by the Levi form,
//! and runs the stage-wise construction of a multiplier `h = 1 + Kr + T` so
//! that `ρ = r·h` is plurisubharmonic on the boundary near the origin.
//!
//! Layout:
//! - [`poly`], [`gaussian`], [`real_poly`]: exact polynomial algebra and Wirtinger calculus
//! - [`geometry`]: normal form, Levi forms, Hessian minors
//! - [`boundary`]: boundary projection and low-discrepancy sampling
//! - [`dominance`]: `|P|² ≤ C·bound` verdicts and the S/E split
//! - [`verify`]: PSD checks and identity / necessary-condition checks on shells
//! - [`method`]: the multiplier construction engine
//! - [`real_convex`]: the real-convex analog

pub mod boundary;
pub mod dominance;
pub mod gaussian;
pub mod geometry;
pub mod linalg;
pub mod method;
pub mod poly;
pub mod real_convex;
pub mod real_poly;
pub mod verify;

pub mod fixtures;

pub use dominance::{BoundKind, DominanceVerdict, ProbeFamily, Status as DominanceStatus};
pub use gaussian::GaussianRational;
pub use geometry::{DefiningFunction, LeviData, NormalFormError};
pub use method::{ConstructionConfig, ConstructionReport, ConstructionStatus, MultiplierCandidate};
pub use poly::{CPoint, Monomial, Var, WPoly};
pub use real_poly::RealPoly;
pub use verify::{BoundaryShell, PsdCheckResult};

/// Serializes any `Display` value as its text form.
pub(crate) fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
