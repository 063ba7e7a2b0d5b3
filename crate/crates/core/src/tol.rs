//! Numerical tolerances shared across modules.

/// Relative singular-value cutoff for rank decisions in `span`.
pub const RANK_REL: f64 = 1e-10;
/// Entrywise tolerance for orthonormality, idempotence and orthogonality tests.
pub const ORTHO: f64 = 1e-10;
/// Two subspaces are equal when their Hausdorff distance is at most this.
pub const SUBSPACE_EQ: f64 = 1e-9;
/// Default equivalence tolerance of measure-based comparisons.
pub const EQ_TOL: f64 = 1e-9;
/// Symmetry tolerance for density operators.
pub const SYMMETRY: f64 = 1e-12;
/// Trace and positivity tolerance for density operators.
pub const DENSITY: f64 = 1e-10;
/// Minimum Hausdorff separation between members of distinct finite-order classes.
pub const CLASS_SEPARATION: f64 = 1e-6;
