use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::score::EquatorScore;
use crate::error::{Error, Result};
use crate::orders::{LikelihoodOrder, Relation};
use crate::sphere::SphereFrame;
use crate::subspace::Subspace;
use crate::tol;

fn default_eq_tol() -> f64 {
    tol::EQ_TOL
}

#[derive(Serialize, Deserialize)]
struct PoleJson {
    pole: Vec<f64>,
    #[serde(default)]
    score: Option<EquatorScore>,
    #[serde(default = "default_eq_tol")]
    eq_tol: f64,
}

fn first_vector(s: &Subspace) -> DVector<f64> {
    s.basis().column(0).into_owned()
}

fn check_eq_tol(eq_tol: f64) -> Result<()> {
    if eq_tol <= 0.0 || !eq_tol.is_finite() {
        return Err(Error::InvalidInput("eq_tol must be positive".into()));
    }
    Ok(())
}

/// Shared line comparison: lines off the equator compare by `|⟨p, u⟩|²`;
/// two equator lines compare by their score; an equator line lies below every
/// line off the equator.
fn compare_lines(frame: &SphereFrame, score: &EquatorScore, eq_tol: f64, a: &DVector<f64>, b: &DVector<f64>) -> Relation {
    let (ma, mb) = (frame.pole_weight(a), frame.pole_weight(b));
    if ma <= eq_tol && mb <= eq_tol {
        Relation::from_values(score.value(frame.angle(a)), score.value(frame.angle(b)), eq_tol)
    } else {
        Relation::from_values(ma, mb, eq_tol)
    }
}

fn by_dimension(a: &Subspace, b: &Subspace) -> Option<Relation> {
    match a.rank().cmp(&b.rank()) {
        std::cmp::Ordering::Less => Some(Relation::Less),
        std::cmp::Ordering::Greater => Some(Relation::Greater),
        std::cmp::Ordering::Equal if a.is_zero() || a.is_full() => Some(Relation::Equivalent),
        std::cmp::Ordering::Equal => None,
    }
}

/// Order on subspaces of `R³` built from a pole `p`.
///
/// Subspaces of different dimension compare by dimension. Lines compare by
/// `|⟨p, u⟩|²`, and equator lines among themselves by the angle score. Planes
/// compare by `‖Π p‖²`; among planes at the same level, planes containing `p`
/// sit above the rest and compare by the score of their equator line.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PoleJson", into = "PoleJson")]
pub struct Example31Order {
    frame: SphereFrame,
    score: EquatorScore,
    eq_tol: f64,
}

impl Example31Order {
    pub fn new(pole: &DVector<f64>, score: EquatorScore, eq_tol: f64) -> Result<Self> {
        check_eq_tol(eq_tol)?;
        Ok(Example31Order { frame: SphereFrame::new(pole)?, score, eq_tol })
    }

    /// Pole `p` with the default angle score.
    pub fn with_pole(pole: &DVector<f64>) -> Result<Self> {
        Self::new(pole, EquatorScore::angle(), tol::EQ_TOL)
    }

    pub fn frame(&self) -> &SphereFrame {
        &self.frame
    }

    pub fn score(&self) -> &EquatorScore {
        &self.score
    }

    fn compare_planes(&self, a: &Subspace, b: &Subspace) -> Relation {
        let p = self.frame.pole();
        let (ma, mb) = (a.project(p).norm_squared(), b.project(p).norm_squared());
        let level = Relation::from_values(ma, mb, self.eq_tol);
        if level != Relation::Equivalent {
            return level;
        }
        let (ina, inb) = (ma >= 1.0 - self.eq_tol, mb >= 1.0 - self.eq_tol);
        match (ina, inb) {
            (true, true) => {
                // A ∩ E is spanned by p × n
                let la = crate::linalg::cross(p, &first_vector(&a.complement()));
                let lb = crate::linalg::cross(p, &first_vector(&b.complement()));
                Relation::from_values(
                    self.score.value(self.frame.angle(&la)),
                    self.score.value(self.frame.angle(&lb)),
                    self.eq_tol,
                )
            }
            (true, false) => Relation::Greater,
            (false, true) => Relation::Less,
            (false, false) => Relation::Equivalent,
        }
    }
}

impl TryFrom<PoleJson> for Example31Order {
    type Error = Error;
    fn try_from(j: PoleJson) -> Result<Self> {
        let score = j.score.unwrap_or_else(EquatorScore::angle);
        Example31Order::new(&DVector::from_vec(j.pole), score, j.eq_tol)
    }
}

impl From<Example31Order> for PoleJson {
    fn from(o: Example31Order) -> Self {
        PoleJson { pole: o.frame.pole().iter().copied().collect(), score: Some(o.score), eq_tol: o.eq_tol }
    }
}

impl LikelihoodOrder for Example31Order {
    fn ambient_dim(&self) -> usize {
        3
    }

    fn compare(&self, a: &Subspace, b: &Subspace) -> Result<Relation> {
        Error::check_dim(3, a.ambient_dim())?;
        Error::check_dim(3, b.ambient_dim())?;
        if let Some(r) = by_dimension(a, b) {
            return Ok(r);
        }
        Ok(if a.rank() == 1 {
            compare_lines(&self.frame, &self.score, self.eq_tol, &first_vector(a), &first_vector(b))
        } else {
            self.compare_planes(a, b)
        })
    }

    fn kind(&self) -> &'static str {
        "example31"
    }

    fn landmarks(&self) -> Vec<Subspace> {
        equator(&self.frame)
    }
}

/// Order on subspaces of `R³` that satisfies the standard axioms but has no
/// representing measure.
///
/// Lines: off-equator lines compare by `|⟨p, u⟩|²` and lie above all equator
/// lines, which compare by a complement-antisymmetric, non-unimodal score
/// `f(φ)`. Planes: `U ⪯ V` iff `V^⊥ ⪯ U^⊥`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PoleJson", into = "PoleJson")]
pub struct CounterexampleOrder {
    frame: SphereFrame,
    score: EquatorScore,
    eq_tol: f64,
}

impl CounterexampleOrder {
    /// Rejects scores that are not antisymmetric under `φ ↦ φ + π/2` or that
    /// are unimodal.
    pub fn new(pole: &DVector<f64>, score: EquatorScore, eq_tol: f64) -> Result<Self> {
        check_eq_tol(eq_tol)?;
        score.validate_counterexample()?;
        Ok(CounterexampleOrder { frame: SphereFrame::new(pole)?, score, eq_tol })
    }

    /// Pole `p` with `f(φ) = sin 2φ + ½ sin 6φ`.
    pub fn with_pole(pole: &DVector<f64>) -> Result<Self> {
        Self::new(pole, EquatorScore::default(), tol::EQ_TOL)
    }

    pub fn frame(&self) -> &SphereFrame {
        &self.frame
    }

    pub fn score(&self) -> &EquatorScore {
        &self.score
    }
}

impl TryFrom<PoleJson> for CounterexampleOrder {
    type Error = Error;
    fn try_from(j: PoleJson) -> Result<Self> {
        CounterexampleOrder::new(&DVector::from_vec(j.pole), j.score.unwrap_or_default(), j.eq_tol)
    }
}

impl From<CounterexampleOrder> for PoleJson {
    fn from(o: CounterexampleOrder) -> Self {
        PoleJson { pole: o.frame.pole().iter().copied().collect(), score: Some(o.score), eq_tol: o.eq_tol }
    }
}

impl LikelihoodOrder for CounterexampleOrder {
    fn ambient_dim(&self) -> usize {
        3
    }

    fn compare(&self, a: &Subspace, b: &Subspace) -> Result<Relation> {
        Error::check_dim(3, a.ambient_dim())?;
        Error::check_dim(3, b.ambient_dim())?;
        if let Some(r) = by_dimension(a, b) {
            return Ok(r);
        }
        Ok(if a.rank() == 1 {
            compare_lines(&self.frame, &self.score, self.eq_tol, &first_vector(a), &first_vector(b))
        } else {
            compare_lines(
                &self.frame,
                &self.score,
                self.eq_tol,
                &first_vector(&b.complement()),
                &first_vector(&a.complement()),
            )
        })
    }

    fn kind(&self) -> &'static str {
        "counter"
    }

    fn landmarks(&self) -> Vec<Subspace> {
        equator(&self.frame)
    }
}

fn equator(frame: &SphereFrame) -> Vec<Subspace> {
    Subspace::line(frame.pole()).map(|l| vec![l.complement()]).unwrap_or_default()
}
