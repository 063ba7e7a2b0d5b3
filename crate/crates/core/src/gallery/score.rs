use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Score of equator lines as a function of their angle `φ ∈ [0, π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EquatorScore {
    /// `(φ − cut) mod π`: a monotone angle score with its jump placed at `cut`.
    Angle { cut: f64 },
    /// `Σ amp · sin(2kφ)` over `(k, amp)` terms.
    Harmonic { terms: Vec<(u32, f64)> },
}

impl Default for EquatorScore {
    /// `f(φ) = sin 2φ + ½ sin 6φ`.
    fn default() -> Self {
        EquatorScore::Harmonic { terms: vec![(1, 1.0), (3, 0.5)] }
    }
}

impl EquatorScore {
    /// Angle score with the jump at 2 rad, away from the coordinate axes and
    /// diagonals.
    pub fn angle() -> Self {
        EquatorScore::Angle { cut: 2.0 }
    }

    pub fn value(&self, phi: f64) -> f64 {
        match self {
            EquatorScore::Angle { cut } => (phi - cut).rem_euclid(PI),
            EquatorScore::Harmonic { terms } => {
                terms.iter().map(|&(k, amp)| amp * (2.0 * k as f64 * phi).sin()).sum()
            }
        }
    }

    fn derivative(&self, phi: f64) -> Option<f64> {
        match self {
            EquatorScore::Angle { .. } => None,
            EquatorScore::Harmonic { terms } => Some(
                terms
                    .iter()
                    .map(|&(k, amp)| amp * 2.0 * k as f64 * (2.0 * k as f64 * phi).cos())
                    .sum(),
            ),
        }
    }

    fn grid(points: usize) -> impl Iterator<Item = f64> {
        (0..points).map(move |i| i as f64 * PI / points as f64)
    }

    /// Largest deviation from `f(φ + π/2) = −f(φ)` over a 720-point grid.
    pub fn antisymmetry_defect(&self) -> f64 {
        Self::grid(720)
            .map(|phi| (self.value(phi + PI / 2.0) + self.value(phi)).abs())
            .fold(0.0, f64::max)
    }

    /// Cyclic sign changes of `f′` on a 720-point grid over `[0, π)`; a score
    /// of the form `β + (α − β) cos²(φ − ψ)` has exactly two.
    pub fn derivative_sign_changes(&self) -> Option<usize> {
        let signs: Vec<bool> = Self::grid(720)
            .map(|phi| self.derivative(phi).map(|d| d > 0.0))
            .collect::<Option<_>>()?;
        let n = signs.len();
        Some((0..n).filter(|&i| signs[i] != signs[(i + 1) % n]).count())
    }

    /// Both conditions needed by the counterexample: complement
    /// antisymmetry and a non-unimodal profile.
    pub fn validate_counterexample(&self) -> Result<()> {
        let defect = self.antisymmetry_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!("score is not complement-antisymmetric (defect {defect:e})")));
        }
        match self.derivative_sign_changes() {
            Some(c) if c > 2 => Ok(()),
            _ => Err(Error::InvalidInput("score must be non-unimodal on the equator".into())),
        }
    }
}
