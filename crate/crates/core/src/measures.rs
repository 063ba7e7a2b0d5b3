//! Quantum probability measures in trace form, `μ(A) = tr(Π_A T)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::subspace::Subspace;
use crate::tol;

/// Real symmetric positive-semidefinite operator with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    mat: DMatrix<f64>,
}

impl DensityOperator {
    /// Validates symmetry, positivity and trace, then symmetrizes exactly.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidInput("density operator must be a nonempty square matrix".into()));
        }
        if mat.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("density operator entries must be finite".into()));
        }
        let asym = linalg::max_abs(&(&mat - mat.transpose()));
        if asym > tol::SYMMETRY {
            return Err(Error::InvariantViolation(format!("operator is not symmetric (deviation {asym:e})")));
        }
        let mat = (&mat + mat.transpose()) * 0.5;
        let trace = mat.trace();
        if (trace - 1.0).abs() > tol::DENSITY {
            return Err(Error::InvariantViolation(format!("trace is {trace}, expected 1")));
        }
        let lowest = linalg::min_eigenvalue(&mat);
        if lowest < -tol::DENSITY {
            return Err(Error::InvariantViolation(format!("smallest eigenvalue {lowest:e} is negative")));
        }
        Ok(DensityOperator { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// `tr(Π_A T)`. Values within `1e-10` outside `[0, 1]` are clamped; larger
    /// excursions are reported as an invariant violation.
    pub fn mu(&self, a: &Subspace) -> Result<f64> {
        Error::check_dim(self.dim(), a.ambient_dim())?;
        if a.is_zero() {
            return Ok(0.0);
        }
        // tr(B Bᵀ T) = Σ_i b_iᵀ T b_i
        let b = a.basis();
        let value = (b.transpose() * &self.mat * b).trace();
        if !(-tol::DENSITY..=1.0 + tol::DENSITY).contains(&value) {
            return Err(Error::InvariantViolation(format!("measure value {value} outside [0, 1]")));
        }
        Ok(value.clamp(0.0, 1.0))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::sorted_eigen(&self.mat).0
    }

    pub fn max_eigenvalue(&self) -> f64 {
        linalg::max_eigenvalue(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.mat)
    }

    /// Pure states are the rank-one operators, i.e. those whose largest
    /// eigenvalue is 1.
    pub fn is_pure(&self) -> bool {
        (self.max_eigenvalue() - 1.0).abs() <= 1e-9
    }

    /// Max-entry distance between operators.
    pub fn distance(&self, other: &DensityOperator) -> Result<f64> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(linalg::max_abs(&(&self.mat - &other.mat)))
    }

    pub fn to_json(&self) -> DensityJson {
        DensityJson {
            dim: self.dim(),
            mat: self.mat.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

/// `p pᵀ` for the normalized `p`.
pub fn pure_state(p: &DVector<f64>) -> Result<DensityOperator> {
    let n = p.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidInput("pure state needs a nonzero vector".into()));
    }
    let u = p / n;
    DensityOperator::new(&u * u.transpose())
}

/// `I / d`, which gives `μ(A) = dim A / d`.
pub fn uniform(d: usize) -> Result<DensityOperator> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    DensityOperator::new(DMatrix::identity(d, d) / d as f64)
}

/// Convex combination `Σ w_i T_i`.
pub fn mixture(weights: &[f64], parts: &[DensityOperator]) -> Result<DensityOperator> {
    if weights.len() != parts.len() || parts.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} operators",
            weights.len(),
            parts.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| **w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidInput(format!("weight {w} is not a nonnegative number")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > tol::DENSITY {
        return Err(Error::InvalidInput(format!("weights sum to {total}, expected 1")));
    }
    let d = parts[0].dim();
    let mut acc = DMatrix::zeros(d, d);
    for (w, t) in weights.iter().zip(parts) {
        Error::check_dim(d, t.dim())?;
        acc += t.matrix() * *w;
    }
    DensityOperator::new(acc)
}

/// Wire format: `{"dim": d, "mat": [[...], ...]}`, rows of `T`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DensityJson {
    pub dim: usize,
    pub mat: Vec<Vec<f64>>,
}

impl TryFrom<DensityJson> for DensityOperator {
    type Error = Error;

    fn try_from(json: DensityJson) -> Result<Self> {
        if json.mat.len() != json.dim {
            return Err(Error::DimensionMismatch { expected: json.dim, found: json.mat.len() });
        }
        for row in &json.mat {
            Error::check_dim(json.dim, row.len())?;
        }
        let flat: Vec<f64> = json.mat.concat();
        DensityOperator::new(DMatrix::from_row_slice(json.dim, json.dim, &flat))
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = DensityJson::deserialize(deserializer)?;
        DensityOperator::try_from(json).map_err(serde::de::Error::custom)
    }
}
