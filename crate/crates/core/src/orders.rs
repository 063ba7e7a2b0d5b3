//! Likelihood orders: complete comparison oracles over subspaces.
//!
//! Separability is not machine-checked. For the record: finite presentations
//! are trivially separable, measure-induced orders are separable (rational
//! levels of `μ` are order-dense), and the lexicographic order is not.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gallery::{CounterexampleOrder, Example31Order};
use crate::measures::DensityOperator;
use crate::subspace::Subspace;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Less,
    Equivalent,
    Greater,
}

impl Relation {
    pub fn reverse(self) -> Relation {
        match self {
            Relation::Less => Relation::Greater,
            Relation::Equivalent => Relation::Equivalent,
            Relation::Greater => Relation::Less,
        }
    }

    /// `A ⪯ B`.
    pub fn is_le(self) -> bool {
        self != Relation::Greater
    }

    /// Compares two real scores, treating gaps within `tol` as ties.
    pub fn from_values(a: f64, b: f64, tol: f64) -> Relation {
        if (a - b).abs() <= tol {
            Relation::Equivalent
        } else if a < b {
            Relation::Less
        } else {
            Relation::Greater
        }
    }

    /// Lexicographic refinement: `self` unless it is a tie.
    pub fn then(self, next: impl FnOnce() -> Result<Relation>) -> Result<Relation> {
        match self {
            Relation::Equivalent => next(),
            other => Ok(other),
        }
    }
}

/// A complete weak order `⪯` on the subspaces of `R^d`.
pub trait LikelihoodOrder {
    fn ambient_dim(&self) -> usize;

    fn compare(&self, a: &Subspace, b: &Subspace) -> Result<Relation>;

    /// Short tag used in reports.
    fn kind(&self) -> &'static str;

    /// The representing operator, for measure-induced orders.
    fn density(&self) -> Option<&DensityOperator> {
        None
    }

    /// Whether the order is defined on the whole Grassmannian, so that
    /// continuity questions make sense.
    fn has_topology(&self) -> bool {
        true
    }

    /// The subspaces the order is defined on, when it is not the whole
    /// Grassmannian.
    fn carrier(&self) -> Option<Vec<Subspace>> {
        None
    }

    /// Subspaces where the definition of the order branches. Audits draw
    /// part of their samples inside these and their complements.
    fn landmarks(&self) -> Vec<Subspace> {
        Vec::new()
    }

    fn le(&self, a: &Subspace, b: &Subspace) -> Result<bool> {
        Ok(self.compare(a, b)?.is_le())
    }
}

fn check_pair(d: usize, a: &Subspace, b: &Subspace) -> Result<()> {
    Error::check_dim(d, a.ambient_dim())?;
    Error::check_dim(d, b.ambient_dim())
}

fn default_eq_tol() -> f64 {
    tol::EQ_TOL
}

/// `A ⪯ B` iff `μ(A) ≤ μ(B) + eq_tol`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureOrder {
    pub operator: DensityOperator,
    #[serde(default = "default_eq_tol")]
    pub eq_tol: f64,
}

pub fn order_from_measure(operator: DensityOperator, eq_tol: f64) -> Result<MeasureOrder> {
    if eq_tol <= 0.0 || !eq_tol.is_finite() {
        return Err(Error::InvalidInput("eq_tol must be positive".into()));
    }
    Ok(MeasureOrder { operator, eq_tol })
}

impl LikelihoodOrder for MeasureOrder {
    fn ambient_dim(&self) -> usize {
        self.operator.dim()
    }

    fn compare(&self, a: &Subspace, b: &Subspace) -> Result<Relation> {
        check_pair(self.ambient_dim(), a, b)?;
        Ok(Relation::from_values(self.operator.mu(a)?, self.operator.mu(b)?, self.eq_tol))
    }

    fn kind(&self) -> &'static str {
        "measure"
    }

    fn density(&self) -> Option<&DensityOperator> {
        Some(&self.operator)
    }

    fn landmarks(&self) -> Vec<Subspace> {
        kernel(&self.operator).into_iter().collect()
    }
}

/// Null space of `T`, when nontrivial.
fn kernel(t: &DensityOperator) -> Option<Subspace> {
    let (values, vectors) = crate::linalg::sorted_eigen(t.matrix());
    let null: Vec<_> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v <= tol::DENSITY)
        .map(|(i, _)| vectors.column(i).into_owned())
        .collect();
    let k = Subspace::span(t.dim(), &null).ok()?;
    (!k.is_zero()).then_some(k)
}

/// Compare by `μ₁`, break ties by `μ₂`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "LexJson", into = "LexJson")]
pub struct LexOrder {
    primary: DensityOperator,
    secondary: DensityOperator,
    eq_tol: f64,
}

#[derive(Serialize, Deserialize)]
struct LexJson {
    primary: DensityOperator,
    secondary: DensityOperator,
    #[serde(default = "default_eq_tol")]
    eq_tol: f64,
}

impl TryFrom<LexJson> for LexOrder {
    type Error = Error;
    fn try_from(j: LexJson) -> Result<Self> {
        lexicographic_order(j.primary, j.secondary, j.eq_tol)
    }
}

impl From<LexOrder> for LexJson {
    fn from(o: LexOrder) -> Self {
        LexJson { primary: o.primary, secondary: o.secondary, eq_tol: o.eq_tol }
    }
}

pub fn lexicographic_order(primary: DensityOperator, secondary: DensityOperator, eq_tol: f64) -> Result<LexOrder> {
    if primary.distance(&secondary)? <= 1e-8 {
        return Err(Error::InvalidInput("lexicographic order needs two distinct operators".into()));
    }
    if eq_tol <= 0.0 || !eq_tol.is_finite() {
        return Err(Error::InvalidInput("eq_tol must be positive".into()));
    }
    Ok(LexOrder { primary, secondary, eq_tol })
}

impl LexOrder {
    pub fn primary(&self) -> &DensityOperator {
        &self.primary
    }

    pub fn secondary(&self) -> &DensityOperator {
        &self.secondary
    }
}

impl LikelihoodOrder for LexOrder {
    fn ambient_dim(&self) -> usize {
        self.primary.dim()
    }

    fn compare(&self, a: &Subspace, b: &Subspace) -> Result<Relation> {
        check_pair(self.ambient_dim(), a, b)?;
        Relation::from_values(self.primary.mu(a)?, self.primary.mu(b)?, self.eq_tol)
            .then(|| Ok(Relation::from_values(self.secondary.mu(a)?, self.secondary.mu(b)?, self.eq_tol)))
    }

    fn kind(&self) -> &'static str {
        "lex"
    }

    fn landmarks(&self) -> Vec<Subspace> {
        kernel(&self.primary).into_iter().collect()
    }
}

/// Order given by an explicit ranking of equivalence classes, lowest first.
/// Only listed subspaces can be compared.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FiniteJson", into = "FiniteJson")]
pub struct FiniteOrder {
    dim: usize,
    classes: Vec<Vec<Subspace>>,
}

#[derive(Serialize, Deserialize)]
struct FiniteJson {
    classes: Vec<Vec<Subspace>>,
}

impl TryFrom<FiniteJson> for FiniteOrder {
    type Error = Error;
    fn try_from(j: FiniteJson) -> Result<Self> {
        finite_order(j.classes)
    }
}

impl From<FiniteOrder> for FiniteJson {
    fn from(o: FiniteOrder) -> Self {
        FiniteJson { classes: o.classes }
    }
}

pub fn finite_order(classes: Vec<Vec<Subspace>>) -> Result<FiniteOrder> {
    let dim = classes
        .iter()
        .flatten()
        .next()
        .map(Subspace::ambient_dim)
        .ok_or_else(|| Error::InvalidInput("finite order needs at least one subspace".into()))?;
    for s in classes.iter().flatten() {
        Error::check_dim(dim, s.ambient_dim())?;
    }
    for (i, ci) in classes.iter().enumerate() {
        for cj in &classes[i + 1..] {
            for a in ci {
                for b in cj {
                    if a.hausdorff(b)? <= tol::CLASS_SEPARATION {
                        return Err(Error::OverlappingClasses(format!(
                            "a subspace of dimension {} appears in two classes",
                            a.rank()
                        )));
                    }
                }
            }
        }
    }
    Ok(FiniteOrder { dim, classes })
}

impl FiniteOrder {
    pub fn classes(&self) -> &[Vec<Subspace>] {
        &self.classes
    }

    fn class_of(&self, s: &Subspace) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c.iter().any(|m| m.approx_eq(s)))
            .ok_or(Error::UnlistedSubspace)
    }
}

impl LikelihoodOrder for FiniteOrder {
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn compare(&self, a: &Subspace, b: &Subspace) -> Result<Relation> {
        check_pair(self.dim, a, b)?;
        let (i, j) = (self.class_of(a)?, self.class_of(b)?);
        Ok(match i.cmp(&j) {
            std::cmp::Ordering::Less => Relation::Less,
            std::cmp::Ordering::Equal => Relation::Equivalent,
            std::cmp::Ordering::Greater => Relation::Greater,
        })
    }

    fn kind(&self) -> &'static str {
        "finite"
    }

    fn has_topology(&self) -> bool {
        false
    }

    fn carrier(&self) -> Option<Vec<Subspace>> {
        Some(self.classes.iter().flatten().cloned().collect())
    }
}

/// Serializable union of every order variant, tagged by `"kind"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AnyOrder {
    Measure(MeasureOrder),
    Lex(LexOrder),
    Finite(FiniteOrder),
    Example31(Example31Order),
    Counter(CounterexampleOrder),
}

impl AnyOrder {
    fn inner(&self) -> &dyn LikelihoodOrder {
        match self {
            AnyOrder::Measure(o) => o,
            AnyOrder::Lex(o) => o,
            AnyOrder::Finite(o) => o,
            AnyOrder::Example31(o) => o,
            AnyOrder::Counter(o) => o,
        }
    }
}

impl LikelihoodOrder for AnyOrder {
    fn ambient_dim(&self) -> usize {
        self.inner().ambient_dim()
    }
    fn compare(&self, a: &Subspace, b: &Subspace) -> Result<Relation> {
        self.inner().compare(a, b)
    }
    fn kind(&self) -> &'static str {
        self.inner().kind()
    }
    fn density(&self) -> Option<&DensityOperator> {
        self.inner().density()
    }
    fn has_topology(&self) -> bool {
        self.inner().has_topology()
    }
    fn carrier(&self) -> Option<Vec<Subspace>> {
        self.inner().carrier()
    }
    fn landmarks(&self) -> Vec<Subspace> {
        self.inner().landmarks()
    }
}

/// A sequence `A_k → A` showing that `{X : X ≺ B}` is not open at `A`:
/// `A ≺ B`, `δ(A_k, A) ≤ shrink^k`, and no `A_k` is strictly below `B`.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityWitness {
    pub a: Subspace,
    pub b: Subspace,
    pub sequence: Vec<Subspace>,
    pub distances: Vec<f64>,
    pub relations: Vec<Relation>,
}

/// Searches for a failure of lower semi-continuity at `a` relative to `b`.
///
/// Candidate sequences rotate one basis vector of `a` towards a direction of
/// `a^⊥` by the angle `asin(shrink^k)`. Returns `None` when `a ⊀ b` (nothing to
/// witness at `a`) or when no candidate direction stays out of `{X ≺ b}` for all
/// `steps` terms.
pub fn continuity_witness<O: LikelihoodOrder + ?Sized>(
    order: &O,
    b: &Subspace,
    a: &Subspace,
    shrink: f64,
    steps: usize,
) -> Result<Option<ContinuityWitness>> {
    if !order.has_topology() {
        return Err(Error::TopologyUndefined);
    }
    if !(shrink > 0.0 && shrink < 1.0) || steps == 0 {
        return Err(Error::InvalidInput("need shrink in (0, 1) and steps >= 1".into()));
    }
    if order.compare(a, b)? != Relation::Less || a.is_zero() || a.is_full() {
        return Ok(None);
    }
    let own = a.basis_vectors();
    let others = a.complement().basis_vectors();
    let mut directions = Vec::new();
    for (i, w) in others.iter().enumerate() {
        directions.push(w.clone());
        directions.push(-w);
        for v in &others[i + 1..] {
            for s in [1.0, -1.0] {
                directions.push((w + v * s) / f64::sqrt(2.0));
            }
        }
    }
    for pivot in 0..own.len() {
        'direction: for w in &directions {
            let mut sequence = Vec::with_capacity(steps);
            let mut distances = Vec::with_capacity(steps);
            let mut relations = Vec::with_capacity(steps);
            for k in 1..=steps {
                let t = shrink.powi(k as i32).asin();
                let mut cols = own.clone();
                cols[pivot] = &own[pivot] * t.cos() + w * t.sin();
                let ak = Subspace::from_columns(&DMatrix::from_columns(&cols))?;
                let rel = order.compare(&ak, b)?;
                if rel == Relation::Less {
                    continue 'direction;
                }
                distances.push(ak.hausdorff(a)?);
                relations.push(rel);
                sequence.push(ak);
            }
            return Ok(Some(ContinuityWitness { a: a.clone(), b: b.clone(), sequence, distances, relations }));
        }
    }
    Ok(None)
}
