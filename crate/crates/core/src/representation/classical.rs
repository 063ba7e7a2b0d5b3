//! Additive probability on a finite set `Ω`: the same margin problem restricted
//! to diagonal operators, with subsets standing for coordinate spans.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::solver::{Geometry, MarginProblem, Settings};
use crate::error::{Error, Result};

/// Subsets are lists of indices into `0..omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalProblem {
    pub omega: usize,
    #[serde(default)]
    pub equiv: Vec<(Vec<usize>, Vec<usize>)>,
    #[serde(default)]
    pub strict: Vec<(Vec<usize>, Vec<usize>)>,
    #[serde(default)]
    pub normalization: bool,
}

/// `indicator_sum = Σ λ_i (1_{B_i} − 1_{A_i}) + Σ c_j (1_{B'_j} − 1_{A'_j})`
/// with every entry `≤ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCertificate {
    pub lambda: Vec<f64>,
    pub c: Vec<f64>,
    pub indicator_sum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ClassicalResult {
    Feasible { p: Vec<f64>, margin: f64 },
    Infeasible { certificate: ClassicalCertificate },
}

impl ClassicalProblem {
    pub fn validate(&self) -> Result<()> {
        if self.omega == 0 {
            return Err(Error::InvalidInput("omega must be nonempty".into()));
        }
        for (a, b) in self.equiv.iter().chain(&self.strict) {
            if let Some(i) = a.iter().chain(b).find(|&&i| i >= self.omega) {
                return Err(Error::InvalidInput(format!("element {i} is outside 0..{}", self.omega)));
            }
        }
        Ok(())
    }

    fn effective_stricts(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut s = self.strict.clone();
        if self.normalization {
            s.push((vec![], (0..self.omega).collect()));
        }
        s
    }

    fn indicator(&self, set: &[usize]) -> Vec<f64> {
        let mut v = vec![0.0; self.omega];
        for &i in set {
            v[i] = 1.0;
        }
        v
    }

    fn difference(&self, pair: &(Vec<usize>, Vec<usize>)) -> Vec<f64> {
        let (a, b) = (self.indicator(&pair.0), self.indicator(&pair.1));
        b.iter().zip(&a).map(|(x, y)| x - y).collect()
    }

    /// `P(A) = Σ_{i ∈ A} p_i`, counting repeated indices once.
    pub fn probability(&self, p: &[f64], set: &[usize]) -> f64 {
        self.indicator(set).iter().zip(p).map(|(x, y)| x * y).sum()
    }
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v))
}

/// Finds a probability vector with margin `≥ tol` on every strict pair and
/// equivalence residuals `≤ tol`, or a certificate that none exists.
pub fn classical_represent(prob: &ClassicalProblem, tol: f64) -> Result<ClassicalResult> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidInput(format!("tol must lie in (0, 1e-3], got {tol}")));
    }
    prob.validate()?;
    let stricts = prob.effective_stricts();
    let problem = MarginProblem {
        geometry: Geometry::Diagonal(prob.omega),
        stricts: stricts.iter().map(|s| diag(&prob.difference(s))).collect(),
        equivs: prob.equiv.iter().map(|e| diag(&prob.difference(e))).collect(),
    };
    let settings = Settings { tol, stop_upper: 1e-12, max_rounds: 1, max_pivots: 200_000 };
    let sol = problem.solve(&settings)?;
    if let Some(cand) = &sol.candidate {
        let mut p: Vec<f64> = (0..prob.omega).map(|i| cand.t[(i, i)].max(0.0)).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let margin = stricts
            .iter()
            .map(|(a, b)| prob.probability(&p, b) - prob.probability(&p, a))
            .fold(f64::INFINITY, f64::min);
        let residual = prob
            .equiv
            .iter()
            .map(|(a, b)| (prob.probability(&p, b) - prob.probability(&p, a)).abs())
            .fold(0.0, f64::max);
        if margin >= tol && residual <= tol {
            return Ok(ClassicalResult::Feasible { p, margin });
        }
    }
    if sol.upper <= tol {
        let indicator_sum = (0..prob.omega).map(|i| sol.m[(i, i)]).collect();
        return Ok(ClassicalResult::Infeasible {
            certificate: ClassicalCertificate { lambda: sol.lambda, c: sol.c, indicator_sum },
        });
    }
    Err(Error::Indeterminate {
        iterations: sol.pivots,
        lower: sol.candidate.map(|c| c.margin).unwrap_or(f64::NEG_INFINITY),
        upper: sol.upper,
    })
}

/// Rebuilds the indicator sum from the problem and checks `λ ≥ 0`, `Σ λ = 1`
/// and every entry `≤ tol`.
pub fn verify_classical_certificate(cert: &ClassicalCertificate, prob: &ClassicalProblem, tol: f64) -> Result<bool> {
    prob.validate()?;
    let stricts = prob.effective_stricts();
    if stricts.is_empty() {
        return Err(Error::InvalidInput("a certificate needs at least one strict pair".into()));
    }
    if cert.lambda.len() != stricts.len() || cert.c.len() != prob.equiv.len() || cert.indicator_sum.len() != prob.omega {
        return Ok(false);
    }
    if cert.lambda.iter().any(|l| !(l.is_finite() && *l >= -tol)) || cert.c.iter().any(|c| !c.is_finite()) {
        return Ok(false);
    }
    if (cert.lambda.iter().sum::<f64>() - 1.0).abs() > tol {
        return Ok(false);
    }
    let mut sum = vec![0.0; prob.omega];
    for (l, s) in cert.lambda.iter().zip(&stricts) {
        for (acc, x) in sum.iter_mut().zip(prob.difference(s)) {
            *acc += l * x;
        }
    }
    for (c, e) in cert.c.iter().zip(&prob.equiv) {
        for (acc, x) in sum.iter_mut().zip(prob.difference(e)) {
            *acc += c * x;
        }
    }
    let scale = 1.0 + cert.c.iter().map(|c| c.abs()).sum::<f64>();
    let matches = sum.iter().zip(&cert.indicator_sum).all(|(a, b)| (a - b).abs() <= tol * scale);
    Ok(matches && sum.iter().all(|x| *x <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_tie() {
        let prob = ClassicalProblem {
            omega: 2,
            equiv: vec![(vec![0], vec![1])],
            strict: vec![(vec![], vec![0])],
            normalization: false,
        };
        let ClassicalResult::Feasible { p, .. } = classical_represent(&prob, 1e-9).unwrap() else {
            panic!("expected feasible")
        };
        assert!((p[0] - 0.5).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn cycle_is_certified() {
        let prob = ClassicalProblem {
            omega: 3,
            equiv: vec![],
            strict: vec![(vec![0], vec![1]), (vec![1], vec![2]), (vec![2], vec![0])],
            normalization: true,
        };
        let ClassicalResult::Infeasible { certificate } = classical_represent(&prob, 1e-9).unwrap() else {
            panic!("expected infeasible")
        };
        assert!(verify_classical_certificate(&certificate, &prob, 1e-9).unwrap());
        assert!(certificate.lambda[3].abs() < 1e-12);
    }

    #[test]
    fn out_of_range_element() {
        let prob = ClassicalProblem { omega: 2, equiv: vec![], strict: vec![(vec![], vec![2])], normalization: false };
        assert!(classical_represent(&prob, 1e-6).is_err());
    }
}
