use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub(crate) fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sorted_eigen(m).0.last().copied().unwrap_or(0.0)
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sorted_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Spectral norm (largest singular value).
pub(crate) fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Euclidean projection of `v` onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - 1.0) / (i as f64 + 1.0);
        if x - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|&x| (x - shift).max(0.0)).collect()
}

/// Frobenius-nearest density operator: eigen-decompose and project the
/// spectrum onto the simplex.
pub(crate) fn project_spectraplex(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = sorted_eigen(m);
    let projected = project_simplex(&values);
    &vectors * DMatrix::from_diagonal(&DVector::from_vec(projected)) * vectors.transpose()
}

pub(crate) fn cross(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}


/// Serde helpers writing vectors as plain arrays.
pub(crate) mod plain {
    use nalgebra::DVector;
    use serde::ser::{SerializeSeq, Serializer};

    pub fn vector<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn vectors<S: Serializer>(vs: &[DVector<f64>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(vs.len()))?;
        for v in vs {
            seq.serialize_element(v.as_slice())?;
        }
        seq.end()
    }
}
