//! Likelihood orders over linear subspaces of a finite-dimensional real
//! Hilbert space.
//!
//! The crate checks comparative-probability axioms on concrete orders,
//! searches for density operators `T` with `μ(A) = tr(Π_A T)` that represent a
//! finite order presentation (or returns a certificate that none exists), and
//! carries the sphere geometry used for pure-state orders in `R³`.
//!
//! Module map:
//!
//! - [`subspace`]: subspaces as orthonormal bases, lattice operations, the
//!   Hausdorff metric.
//! - [`measures`]: density operators and `μ(A) = tr(Π_A T)`.
//! - [`orders`]: the [`LikelihoodOrder`](orders::LikelihoodOrder) trait and the
//!   measure-induced, lexicographic, and finite variants.
//! - [`axioms`]: axiom checkers, cancelation instances, seeded audits.
//! - [`representation`]: synthesis of representing operators, infeasibility
//!   certificates, partial representation, the classical diagonal baseline.
//! - [`sphere`]: EW circles, Piron paths, half-pole bands.
//! - [`gallery`]: the named orders and theorem-level checks, including the
//!   Kochen-Specker coloring search.

pub mod axioms;
pub mod error;
pub mod gallery;
mod linalg;
pub mod measures;
pub mod orders;
pub mod random;
pub mod representation;
pub mod sphere;
pub mod subspace;
pub mod tol;

pub use error::{Error, Result};
pub use measures::DensityOperator;
pub use orders::{AnyOrder, LikelihoodOrder, Relation};
pub use subspace::Subspace;
