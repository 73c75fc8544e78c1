//! Secluded unit-cube partitions of ℝ^d and the deterministic rounding
//! schemes they induce.
//!
//! All geometry is exact: coordinates are arbitrary-precision rationals, so
//! half-open boundary decisions never depend on floating-point luck.
//!
//! * [`partition`]: grid, layered, product and scaled unit-cube partitions.
//! * [`neighborhood`]: members meeting an ℓ∞ ball, seclusion audits.
//! * [`depth`]: depth of box families and the pigeonhole witness.
//! * [`sperner`]: rich points of grid colorings of the unit cube.
//! * [`rounding`]: rounding schemes, output sets, collapse statistics.
//! * [`bounds`]: closed-form degree and tolerance bounds.

pub mod bounds;
pub mod depth;
pub mod enclosure;
pub mod error;
pub mod geometry;
pub mod neighborhood;
pub mod partition;
pub mod rounding;
pub mod scalar;
pub mod sperner;

pub use bounds::NormKind;
pub use depth::{BoxFamily, DepthCell};
pub use error::{Error, Result};
pub use geometry::{box_intersects_ball, AxisBox, BallKind, InfBall, Interval, Point};
pub use neighborhood::{
    audit_seclusion, enumerate_neighborhood, lower_bound_witness, AuditOptions, AuditResult, NeighborhoodReport,
    Strategy,
};
pub use partition::{build_profile, MemberId, PartitionSpec, SecludedClaim};
pub use rounding::{Representative, RoundingScheme};
pub use scalar::Scalar;
pub use sperner::GridColoring;
