//! Coarse invariants of finitely generated groups at desk scale.
//!
//! The crate computes word-metric balls in a small catalog of marked groups,
//! builds finite windows of coset spaces G/H with the Hausdorff metric,
//! estimates numbers of ends, runs Rips-complex (co)homology over a PID, and
//! checks the exact sequences (Künneth, universal coefficients) and the Euler
//! characteristic calculus for graphs of groups that tie these together.
//!
//! Everything is windowed and certified: operations that cannot decide a
//! question inside their window say so (`GreaterThan`, `NoBoundUpToRadius`,
//! refusals) instead of guessing.

pub mod complexes;
pub mod coset;
pub mod ends;
pub mod euler;
pub mod groups;
pub mod homology;
pub mod matrix;
pub mod par;
pub mod report;
pub mod ring;
pub mod window;

/// Version stamp embedded in every serialized report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Version of the JSON report schema. Bump on any incompatible change.
pub const SCHEMA_VERSION: u32 = 1;

/// Default node budget for ball enumeration and BFS searches.
pub const DEFAULT_BUDGET: usize = 1_000_000;
