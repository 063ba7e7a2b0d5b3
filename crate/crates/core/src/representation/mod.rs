//! Representing density operators for finite order presentations.
//!
//! A [`RepresentationProblem`] lists strict pairs `A ≺ B` and equivalences
//! `A ∼ B`. [`synthesize`] looks for a density operator `T` with
//! `tr((Π_B − Π_A) T) ≥ m > 0` on every strict pair and `= 0` on every
//! equivalence; when none exists it returns weights `(λ, c)` such that
//! `M = Σ λ_i (Π_{B_i} − Π_{A_i}) + Σ c_j (Π_{B'_j} − Π_{A'_j})` is negative
//! semidefinite, which rules out any positive margin because
//! `Σ λ_i tr(D_i T) = tr(M T) ≤ 0` for every admissible `T`.

mod classical;
mod simplex;
mod solver;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use classical::{
    classical_represent, verify_classical_certificate, ClassicalCertificate, ClassicalProblem, ClassicalResult,
};

use crate::error::{Error, Result};
use crate::linalg;
use crate::measures::DensityOperator;
use crate::orders::{LikelihoodOrder, Relation};
use crate::subspace::Subspace;
use solver::{Geometry, MarginProblem, MarginSolution, Settings};

const MAX_ROUNDS: usize = 400;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ProblemJson", into = "ProblemJson")]
pub struct RepresentationProblem {
    dim: usize,
    equiv: Vec<(Subspace, Subspace)>,
    strict: Vec<(Subspace, Subspace)>,
    normalization: bool,
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    dim: usize,
    #[serde(default)]
    equiv: Vec<(Subspace, Subspace)>,
    #[serde(default)]
    strict: Vec<(Subspace, Subspace)>,
    #[serde(default)]
    normalization: bool,
}

impl TryFrom<ProblemJson> for RepresentationProblem {
    type Error = Error;
    fn try_from(j: ProblemJson) -> Result<Self> {
        RepresentationProblem::new(j.dim, j.equiv, j.strict, j.normalization)
    }
}

impl From<RepresentationProblem> for ProblemJson {
    fn from(p: RepresentationProblem) -> Self {
        ProblemJson { dim: p.dim, equiv: p.equiv, strict: p.strict, normalization: p.normalization }
    }
}

fn same_pair(x: &(Subspace, Subspace), y: &(Subspace, Subspace)) -> bool {
    x.0.approx_eq(&y.0) && x.1.approx_eq(&y.1)
}

impl RepresentationProblem {
    /// `normalization` adds the strict pair `{0} ≺ H`.
    pub fn new(
        dim: usize,
        equiv: Vec<(Subspace, Subspace)>,
        strict: Vec<(Subspace, Subspace)>,
        normalization: bool,
    ) -> Result<Self> {
        let p = RepresentationProblem { dim, equiv, strict, normalization };
        p.validate()?;
        Ok(p)
    }

    /// Every pair `i < j` of `carrier`, compared by `order`.
    pub fn from_order<O: LikelihoodOrder + ?Sized>(
        order: &O,
        carrier: &[Subspace],
        normalization: bool,
    ) -> Result<Self> {
        let mut equiv = Vec::new();
        let mut strict = Vec::new();
        for (i, a) in carrier.iter().enumerate() {
            for b in &carrier[i + 1..] {
                match order.compare(a, b)? {
                    Relation::Less => strict.push((a.clone(), b.clone())),
                    Relation::Greater => strict.push((b.clone(), a.clone())),
                    Relation::Equivalent => equiv.push((a.clone(), b.clone())),
                }
            }
        }
        Self::new(order.ambient_dim(), equiv, strict, normalization)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        for (a, b) in self.equiv.iter().chain(&self.strict) {
            Error::check_dim(self.dim, a.ambient_dim())?;
            Error::check_dim(self.dim, b.ambient_dim())?;
        }
        for e in &self.equiv {
            let flipped = (e.1.clone(), e.0.clone());
            if self.strict.iter().any(|s| same_pair(s, e) || same_pair(s, &flipped)) {
                return Err(Error::InvalidInput("a pair is listed both as strict and as an equivalence".into()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn equivalences(&self) -> &[(Subspace, Subspace)] {
        &self.equiv
    }

    pub fn stricts(&self) -> &[(Subspace, Subspace)] {
        &self.strict
    }

    pub fn normalization(&self) -> bool {
        self.normalization
    }

    /// Strict pairs in certificate order: the listed ones, then `{0} ≺ H`
    /// when normalization is on.
    pub fn effective_stricts(&self) -> Vec<(Subspace, Subspace)> {
        let mut s = self.strict.clone();
        if self.normalization {
            s.push((Subspace::zero(self.dim), Subspace::full(self.dim)));
        }
        s
    }

    /// Indices of the first occurrence of each distinct pair.
    fn distinct(pairs: &[(Subspace, Subspace)]) -> Vec<usize> {
        let mut keep: Vec<usize> = Vec::new();
        for (i, p) in pairs.iter().enumerate() {
            if !keep.iter().any(|&k| same_pair(&pairs[k], p)) {
                keep.push(i);
            }
        }
        keep
    }
}

fn difference(pair: &(Subspace, Subspace)) -> DMatrix<f64> {
    pair.1.projection() - pair.0.projection()
}

/// `λ` over [`RepresentationProblem::effective_stricts`], `c` over the
/// equivalences, and `M` stored by rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub lambda: Vec<f64>,
    pub c: Vec<f64>,
    pub m: Vec<Vec<f64>>,
    pub max_eigenvalue: f64,
}

impl InfeasibilityCertificate {
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.m.len();
        DMatrix::from_fn(n, n, |i, j| self.m[i].get(j).copied().unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub rounds: usize,
    pub pivots: usize,
    pub cuts: usize,
    /// Certified upper bound on the best achievable margin.
    pub upper_bound: f64,
    /// Best margin attained by a verified operator, if any.
    pub lower_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RepresentationResult {
    Feasible { operator: DensityOperator, margin: f64, equivalence_residual: f64, diagnostics: Diagnostics },
    Infeasible { certificate: InfeasibilityCertificate, diagnostics: Diagnostics },
}

impl RepresentationResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, RepresentationResult::Feasible { .. })
    }

    pub fn operator(&self) -> Option<&DensityOperator> {
        match self {
            RepresentationResult::Feasible { operator, .. } => Some(operator),
            RepresentationResult::Infeasible { .. } => None,
        }
    }

    pub fn margin(&self) -> Option<f64> {
        match self {
            RepresentationResult::Feasible { margin, .. } => Some(*margin),
            RepresentationResult::Infeasible { .. } => None,
        }
    }

    pub fn certificate(&self) -> Option<&InfeasibilityCertificate> {
        match self {
            RepresentationResult::Infeasible { certificate, .. } => Some(certificate),
            RepresentationResult::Feasible { .. } => None,
        }
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        match self {
            RepresentationResult::Feasible { diagnostics, .. } | RepresentationResult::Infeasible { diagnostics, .. } => {
                diagnostics
            }
        }
    }
}

/// Minimum strict margin and maximum equivalence residual of `t`, computed
/// through `μ` rather than solver internals.
pub fn evaluate(prob: &RepresentationProblem, t: &DensityOperator) -> Result<(f64, f64)> {
    Error::check_dim(prob.dim, t.dim())?;
    let mut margin = f64::INFINITY;
    for (a, b) in prob.effective_stricts() {
        margin = margin.min(t.mu(&b)? - t.mu(&a)?);
    }
    let mut residual: f64 = 0.0;
    for (a, b) in &prob.equiv {
        residual = residual.max((t.mu(b)? - t.mu(a)?).abs());
    }
    Ok((margin, residual))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidInput(format!("tol must lie in (0, 1e-3], got {tol}")));
    }
    Ok(())
}

struct Solved {
    solution: MarginSolution,
    strict_index: Vec<usize>,
    equiv_index: Vec<usize>,
    n_strict: usize,
}

fn run(prob: &RepresentationProblem, tol: f64, stop_upper: f64) -> Result<Solved> {
    prob.validate()?;
    let stricts = prob.effective_stricts();
    let strict_index = RepresentationProblem::distinct(&stricts);
    let equiv_index = RepresentationProblem::distinct(&prob.equiv);
    let problem = MarginProblem {
        geometry: Geometry::Full(prob.dim),
        stricts: strict_index.iter().map(|&i| difference(&stricts[i])).collect(),
        equivs: equiv_index.iter().map(|&i| difference(&prob.equiv[i])).collect(),
    };
    let settings = Settings { tol, stop_upper, max_rounds: MAX_ROUNDS, max_pivots: MAX_PIVOTS };
    let solution = problem.solve(&settings)?;
    Ok(Solved { solution, strict_index, equiv_index, n_strict: stricts.len() })
}

fn certificate(solved: &Solved, n_equiv: usize) -> InfeasibilityCertificate {
    let s = &solved.solution;
    let mut lambda = vec![0.0; solved.n_strict];
    for (k, &i) in solved.strict_index.iter().enumerate() {
        lambda[i] = s.lambda[k];
    }
    let mut c = vec![0.0; n_equiv];
    for (k, &i) in solved.equiv_index.iter().enumerate() {
        c[i] = s.c[k];
    }
    InfeasibilityCertificate {
        lambda,
        c,
        m: s.m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        max_eigenvalue: s.upper,
    }
}

fn diagnostics(s: &MarginSolution) -> Diagnostics {
    Diagnostics {
        rounds: s.rounds,
        pivots: s.pivots,
        cuts: s.cuts,
        upper_bound: s.upper,
        lower_bound: s.candidate.as_ref().map(|c| c.margin),
    }
}

/// The solver's best operator, re-checked through `μ`.
fn verified_operator(prob: &RepresentationProblem, solved: &Solved) -> Option<(DensityOperator, f64, f64)> {
    let cand = solved.solution.candidate.as_ref()?;
    let t = (&cand.t + cand.t.transpose()) * 0.5;
    let t = linalg::project_spectraplex(&t);
    let t = (&t + t.transpose()) * 0.5;
    let op = DensityOperator::new(t).ok()?;
    let (margin, residual) = evaluate(prob, &op).ok()?;
    Some((op, margin, residual))
}

/// Maximizes the minimum strict margin. Returns `Feasible` when a verified
/// operator reaches margin `≥ tol` with equivalence residuals `≤ tol`, and
/// `Infeasible` when the certified bound on the margin is `≤ tol`.
pub fn synthesize(prob: &RepresentationProblem, tol: f64) -> Result<RepresentationResult> {
    check_tol(tol)?;
    let solved = run(prob, tol, 1e-10)?;
    let diag = diagnostics(&solved.solution);
    if let Some((operator, margin, residual)) = verified_operator(prob, &solved) {
        if margin >= tol && residual <= tol {
            return Ok(RepresentationResult::Feasible {
                operator,
                margin,
                equivalence_residual: residual,
                diagnostics: diag,
            });
        }
    }
    if solved.solution.upper <= tol {
        return Ok(RepresentationResult::Infeasible { certificate: certificate(&solved, prob.equiv.len()), diagnostics: diag });
    }
    Err(Error::Indeterminate {
        iterations: solved.solution.pivots,
        lower: diag.lower_bound.unwrap_or(f64::NEG_INFINITY),
        upper: solved.solution.upper,
    })
}

/// Like [`synthesize`] with strict pairs relaxed to `μ(A) ≤ μ(B)`: feasible
/// when the best verified margin is `≥ −tol`, infeasible when the certified
/// bound is `< −tol`.
pub fn partial_representation(prob: &RepresentationProblem, tol: f64) -> Result<RepresentationResult> {
    check_tol(tol)?;
    let solved = run(prob, tol, -tol)?;
    let diag = diagnostics(&solved.solution);
    if let Some((operator, margin, residual)) = verified_operator(prob, &solved) {
        if margin >= -tol && residual <= tol {
            return Ok(RepresentationResult::Feasible {
                operator,
                margin,
                equivalence_residual: residual,
                diagnostics: diag,
            });
        }
    }
    if solved.solution.upper < -tol {
        return Ok(RepresentationResult::Infeasible { certificate: certificate(&solved, prob.equiv.len()), diagnostics: diag });
    }
    Err(Error::Indeterminate {
        iterations: solved.solution.pivots,
        lower: diag.lower_bound.unwrap_or(f64::NEG_INFINITY),
        upper: solved.solution.upper,
    })
}

/// Re-checks a certificate from the problem's projections alone: `λ ≥ 0`,
/// `Σ λ = 1`, `M` matches the stated weights, and `λ_max(M) ≤ tol`, all
/// within `tol`. A problem without strict pairs has no certificate.
pub fn verify_certificate(cert: &InfeasibilityCertificate, prob: &RepresentationProblem, tol: f64) -> Result<bool> {
    let stricts = prob.effective_stricts();
    if stricts.is_empty() {
        return Err(Error::InvalidInput("a certificate needs at least one strict pair".into()));
    }
    if cert.lambda.len() != stricts.len() || cert.c.len() != prob.equiv.len() {
        return Ok(false);
    }
    if cert.m.len() != prob.dim || cert.m.iter().any(|r| r.len() != prob.dim) {
        return Ok(false);
    }
    let finite = cert.lambda.iter().chain(&cert.c).chain(cert.m.iter().flatten()).all(|x| x.is_finite());
    if !finite || cert.lambda.iter().any(|l| *l < -tol) {
        return Ok(false);
    }
    if (cert.lambda.iter().sum::<f64>() - 1.0).abs() > tol {
        return Ok(false);
    }
    let mut m = DMatrix::zeros(prob.dim, prob.dim);
    for (l, pair) in cert.lambda.iter().zip(&stricts) {
        m += difference(pair) * *l;
    }
    for (c, pair) in cert.c.iter().zip(&prob.equiv) {
        m += difference(pair) * *c;
    }
    let stated = cert.matrix();
    let scale = 1.0 + cert.c.iter().map(|c| c.abs()).sum::<f64>();
    if linalg::max_abs(&(&m - &stated)) > tol * scale {
        return Ok(false);
    }
    Ok(linalg::max_eigenvalue(&m) <= tol)
}
