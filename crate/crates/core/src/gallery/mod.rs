//! Named orders and theorem-level checks.
//!
//! * [`Example31Order`]: satisfies de Finetti's axiom but not Negation.
//! * [`CounterexampleOrder`]: satisfies the standard axioms yet admits no
//!   representing measure; [`counterexample_carrier`] gives the finite
//!   equator instance that the solver certifies infeasible.
//! * Pure-state and uniform characterization checks, the restricted-plane
//!   probe, and the in-plane complement properties.
//! * Kochen–Specker ray sets and the two-color search.

mod checks;
mod ks;
mod named;
mod score;

pub use checks::{
    claim0_check, counter2_probe, find_equal_minimal_triple, mm_tags_check, pure_state_theorem_check,
    triple_basis_check, uniform_characterization_check, Counter2Probe, PairDisagreement, PropertyReport,
    PureStateReport, TripleCheck, UniformReport,
};
pub use ks::{ks_build, ks_color, peres33, KsColoring, KsInstance};
pub use named::{CounterexampleOrder, Example31Order};
pub use score::EquatorScore;

use crate::error::{Error, Result};
use crate::subspace::Subspace;

/// `{0}`, `lines` equator lines at angles `kπ/lines`, one line off the
/// equator, and `H`.
pub fn counterexample_carrier(order: &CounterexampleOrder, lines: usize) -> Result<Vec<Subspace>> {
    if lines < 2 {
        return Err(Error::InvalidInput("need at least two equator lines".into()));
    }
    let frame = order.frame();
    let mut carrier = vec![Subspace::zero(3)];
    for k in 0..lines {
        let phi = k as f64 * std::f64::consts::PI / lines as f64;
        carrier.push(Subspace::line(&frame.equator_vector(phi))?);
    }
    let tilted = frame.equator_vector(0.0) * 0.6 + frame.pole() * 0.8;
    carrier.push(Subspace::line(&tilted)?);
    carrier.push(Subspace::full(3));
    Ok(carrier)
}
