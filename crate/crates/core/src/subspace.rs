//! Linear subspaces of `R^d` held as orthonormal bases.
//!
//! A [`Subspace`] stores an orthonormal basis (as the columns of a `d × k`
//! matrix) together with its orthogonal projection `Π = B Bᵀ`, computed once at
//! construction. Values are immutable; equality is geometric (Hausdorff
//! distance at most [`tol::SUBSPACE_EQ`]), never basis identity.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::tol;

#[derive(Debug, Clone)]
pub struct Subspace {
    basis: DMatrix<f64>,
    projection: DMatrix<f64>,
}

impl Subspace {
    fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        let projection = &basis * basis.transpose();
        Subspace { basis, projection }
    }

    /// The zero subspace `{0}` of `R^d`.
    pub fn zero(d: usize) -> Self {
        Self::from_orthonormal(DMatrix::zeros(d, 0))
    }

    /// The whole space `R^d`.
    pub fn full(d: usize) -> Self {
        Self::from_orthonormal(DMatrix::identity(d, d))
    }

    /// Span of the standard basis vectors with the given indices. The basis is
    /// exact (no orthogonalization round-off).
    pub fn coordinate(d: usize, indices: &[usize]) -> Result<Self> {
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if let Some(&bad) = idx.iter().find(|&&i| i >= d) {
            return Err(Error::InvalidInput(format!("coordinate index {bad} out of range for dimension {d}")));
        }
        let mut basis = DMatrix::zeros(d, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            basis[(i, c)] = 1.0;
        }
        Ok(Self::from_orthonormal(basis))
    }

    /// Span of the given vectors, all of dimension `d`.
    ///
    /// Uses a singular value decomposition; directions with singular value at
    /// most `1e-10 · σ_max` are treated as dependent.
    pub fn span(d: usize, vectors: &[DVector<f64>]) -> Result<Self> {
        for v in vectors {
            Error::check_dim(d, v.len())?;
        }
        if vectors.is_empty() {
            return Ok(Self::zero(d));
        }
        let m = DMatrix::from_columns(vectors);
        Self::from_columns(&m)
    }

    /// Span of the columns of `m`.
    pub fn from_columns(m: &DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() == 0 || d == 0 {
            return Ok(Self::zero(d));
        }
        let svd = m.clone().svd(true, false);
        let u = svd.u.as_ref().ok_or_else(|| Error::InvariantViolation("svd without U".into()))?;
        let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
        if sigma_max == 0.0 {
            return Ok(Self::zero(d));
        }
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > tol::RANK_REL * sigma_max)
            .collect();
        let basis = DMatrix::from_fn(d, keep.len(), |r, c| u[(r, keep[c])]);
        Ok(Self::from_orthonormal(basis))
    }

    /// One-dimensional span of a nonzero vector.
    pub fn line(v: &DVector<f64>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidInput("zero vector does not span a line".into()));
        }
        Ok(Self::from_orthonormal(DMatrix::from_column_slice(v.len(), 1, (v / n).as_slice())))
    }

    /// Span of row vectors given as slices.
    pub fn from_rows(d: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let vectors: Vec<DVector<f64>> = rows.iter().map(|r| DVector::from_column_slice(r)).collect();
        Self::span(d, &vectors)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Dimension of the subspace.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.ambient_dim()
    }

    /// Orthonormal basis as columns of a `d × k` matrix.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<DVector<f64>> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.projection * v
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        (v - self.project(v)).norm() <= tol * v.norm().max(1.0)
    }

    fn same_ambient(&self, other: &Subspace) -> Result<()> {
        Error::check_dim(self.ambient_dim(), other.ambient_dim())
    }

    /// Orthogonal complement `A^⊥`.
    pub fn complement(&self) -> Subspace {
        let d = self.ambient_dim();
        if self.is_zero() {
            return Self::full(d);
        }
        if self.is_full() {
            return Self::zero(d);
        }
        let residual = DMatrix::identity(d, d) - &self.projection;
        let (values, vectors) = linalg::sorted_eigen(&residual);
        let keep: Vec<usize> = (0..d).filter(|&i| values[i] > 0.5).collect();
        let basis = DMatrix::from_fn(d, keep.len(), |r, c| vectors[(r, keep[c])]);
        Self::from_orthonormal(basis)
    }

    /// `A + B`, the span of both bases.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        let mut cols = self.basis_vectors();
        cols.extend(other.basis_vectors());
        Self::span(self.ambient_dim(), &cols)
    }

    /// `A ∩ B`, computed as `(A^⊥ + B^⊥)^⊥`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        Ok(self.complement().sum(&other.complement())?.complement())
    }

    /// `‖Π_A Π_B‖_max ≤ 1e-10`.
    pub fn is_orthogonal(&self, other: &Subspace) -> Result<bool> {
        self.same_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(true);
        }
        Ok(linalg::max_abs(&(&self.projection * &other.projection)) <= tol::ORTHO)
    }

    /// Hausdorff distance between the unit balls of the two subspaces:
    /// `max(‖(I − Π_B) Π_A‖, ‖(I − Π_A) Π_B‖)`, which is 1 whenever the
    /// dimensions differ.
    pub fn hausdorff(&self, other: &Subspace) -> Result<f64> {
        self.same_ambient(other)?;
        if self.rank() != other.rank() {
            return Ok(1.0);
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        let d = self.ambient_dim();
        let id = DMatrix::<f64>::identity(d, d);
        let forward = linalg::op_norm(&((&id - &other.projection) * &self.basis));
        let backward = linalg::op_norm(&((&id - &self.projection) * &other.basis));
        Ok(forward.max(backward).clamp(0.0, 1.0))
    }

    /// Geometric equality: Hausdorff distance at most `1e-9`.
    pub fn approx_eq(&self, other: &Subspace) -> bool {
        matches!(self.hausdorff(other), Ok(h) if h <= tol::SUBSPACE_EQ)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        self.same_ambient(other)?;
        Ok(self.basis_vectors().iter().all(|v| other.contains(v, tol::SUBSPACE_EQ)))
    }

    pub fn to_json(&self) -> SubspaceJson {
        SubspaceJson {
            dim: self.ambient_dim(),
            basis: self.basis.column_iter().map(|c| c.iter().copied().collect()).collect(),
        }
    }

    /// Checks the stored basis and projection against the orthonormality and
    /// idempotence invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.rank();
        let gram = self.basis.transpose() * &self.basis;
        if linalg::max_abs(&(gram - DMatrix::identity(k, k))) > tol::ORTHO {
            return Err(Error::InvariantViolation("basis is not orthonormal".into()));
        }
        let p = &self.projection;
        if linalg::max_abs(&(p * p - p)) > tol::ORTHO || linalg::max_abs(&(p - p.transpose())) > tol::ORTHO {
            return Err(Error::InvariantViolation("projection is not a symmetric idempotent".into()));
        }
        if (p.trace() - k as f64).abs() > tol::ORTHO {
            return Err(Error::InvariantViolation("projection trace differs from rank".into()));
        }
        Ok(())
    }
}

/// Wire format: `{"dim": d, "basis": [[...], ...]}` with basis vectors as rows.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SubspaceJson {
    pub dim: usize,
    pub basis: Vec<Vec<f64>>,
}

impl TryFrom<SubspaceJson> for Subspace {
    type Error = Error;

    /// Re-orthonormalizes the rows; rejects rows that are linearly dependent.
    fn try_from(json: SubspaceJson) -> Result<Self> {
        if json.dim == 0 {
            return Err(Error::InvalidInput("ambient dimension must be positive".into()));
        }
        for row in &json.basis {
            if row.len() != json.dim {
                return Err(Error::DimensionMismatch { expected: json.dim, found: row.len() });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("basis entries must be finite".into()));
            }
        }
        let s = Subspace::from_rows(json.dim, &json.basis)?;
        if s.rank() != json.basis.len() {
            return Err(Error::InvalidInput(format!(
                "{} basis rows span only {} dimensions",
                json.basis.len(),
                s.rank()
            )));
        }
        Ok(s)
    }
}

impl From<&Subspace> for SubspaceJson {
    fn from(s: &Subspace) -> Self {
        s.to_json()
    }
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = SubspaceJson::deserialize(deserializer)?;
        Subspace::try_from(json).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn e(d: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        v
    }

    #[test]
    fn span_of_nothing_is_zero() {
        let s = Subspace::span(3, &[]).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(s.ambient_dim(), 3);
    }

    #[test]
    fn span_drops_dependent_vectors() {
        let s = Subspace::span(3, &[e(3, 0), e(3, 0) * 2.0, e(3, 1)]).unwrap();
        assert_eq!(s.rank(), 2);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]));
        assert!(linalg::max_abs(&(s.projection() - expected)) < 1e-12);
        s.check_invariants().unwrap();
    }

    #[test]
    fn span_rejects_mixed_dimensions() {
        let err = Subspace::span(3, &[e(3, 0), e(2, 0)]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, found: 2 });
    }

    #[test]
    fn complement_examples() {
        let zero = Subspace::zero(3);
        assert!(zero.complement().is_full());
        let l = Subspace::line(&e(3, 0)).unwrap();
        let c = l.complement();
        assert!(c.approx_eq(&Subspace::coordinate(3, &[1, 2]).unwrap()));
    }

    #[test]
    fn sum_and_intersect_examples() {
        let a = Subspace::line(&e(3, 0)).unwrap();
        let b = Subspace::line(&e(3, 1)).unwrap();
        assert!(a.sum(&Subspace::zero(3)).unwrap().approx_eq(&a));
        assert!(a.sum(&b).unwrap().approx_eq(&Subspace::coordinate(3, &[0, 1]).unwrap()));

        let p12 = Subspace::coordinate(3, &[0, 1]).unwrap();
        let p23 = Subspace::coordinate(3, &[1, 2]).unwrap();
        assert!(p12.intersect(&p23).unwrap().approx_eq(&b));
        assert!(p12.intersect(&Subspace::full(3)).unwrap().approx_eq(&p12));
    }

    #[test]
    fn orthogonality_examples() {
        let mut rng = random::stream_rng(5, 0);
        let a = random::subspace(&mut rng, 4, 2);
        assert!(a.is_orthogonal(&a.complement()).unwrap());
        let l1 = Subspace::line(&e(3, 0)).unwrap();
        let l2 = Subspace::line(&(e(3, 0) + e(3, 1))).unwrap();
        assert!(!l1.is_orthogonal(&l2).unwrap());
        assert!(a.is_orthogonal(&Subspace::zero(4)).unwrap());
    }

    #[test]
    fn hausdorff_examples() {
        let l1 = Subspace::line(&e(3, 0)).unwrap();
        let l2 = Subspace::line(&e(3, 1)).unwrap();
        assert_eq!(l1.hausdorff(&l1).unwrap(), 0.0);
        assert!((l1.hausdorff(&l2).unwrap() - 1.0).abs() < 1e-15);
        for alpha in [0.01, 0.3, 1.0, 1.5] {
            let l = Subspace::line(&(e(3, 0) * f64::cos(alpha) + e(3, 1) * f64::sin(alpha))).unwrap();
            assert!((l1.hausdorff(&l).unwrap() - alpha.sin()).abs() < 1e-12);
        }
        let plane = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert_eq!(plane.hausdorff(&l1).unwrap(), 1.0);
    }

    #[test]
    fn json_rejects_dependent_rows() {
        let json = SubspaceJson { dim: 3, basis: vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]] };
        assert!(Subspace::try_from(json).is_err());
        let ok = SubspaceJson { dim: 3, basis: vec![vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 3.0]] };
        let s = Subspace::try_from(ok).unwrap();
        assert_eq!(s.rank(), 2);
        s.check_invariants().unwrap();
    }

    #[test]
    fn json_round_trip_preserves_subspace() {
        let mut rng = random::stream_rng(9, 1);
        let a = random::subspace(&mut rng, 5, 3);
        let text = serde_json::to_string(&a).unwrap();
        let back: Subspace = serde_json::from_str(&text).unwrap();
        assert!(a.approx_eq(&back));
    }
}
