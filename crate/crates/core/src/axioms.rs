//! Axiom checkers, cancelation instances and the seeded audit harness.

use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::orders::{LikelihoodOrder, Relation};
use crate::random::{self, SeededRng};
use crate::subspace::Subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

/// Outcome of one check together with the relations it looked at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub outcome: Outcome,
    pub relations: Vec<Relation>,
}

impl Check {
    fn new(pass: bool, relations: Vec<Relation>) -> Check {
        Check { outcome: if pass { Outcome::Pass } else { Outcome::Fail }, relations }
    }

    fn not_applicable(relations: Vec<Relation>) -> Check {
        Check { outcome: Outcome::NotApplicable, relations }
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

fn require_orthogonal(a: &Subspace, b: &Subspace, what: &str) -> Result<()> {
    if !a.is_orthogonal(b)? {
        return Err(Error::Precondition(format!("{what} must be orthogonal")));
    }
    Ok(())
}

/// With `C ⊥ A` and `C ⊥ B`: `A ⪯ B` iff `A + C ⪯ B + C`.
pub fn check_definetti<O: LikelihoodOrder + ?Sized>(order: &O, a: &Subspace, b: &Subspace, c: &Subspace) -> Result<Check> {
    require_orthogonal(a, c, "A and C")?;
    require_orthogonal(b, c, "B and C")?;
    let before = order.compare(a, b)?;
    let after = order.compare(&a.sum(c)?, &b.sum(c)?)?;
    Ok(Check::new(before == after, vec![before, after]))
}

/// `A ⪯ B` implies `B^⊥ ⪯ A^⊥`, applied to the pair in both directions.
pub fn check_negation<O: LikelihoodOrder + ?Sized>(order: &O, a: &Subspace, b: &Subspace) -> Result<Check> {
    let direct = order.compare(a, b)?;
    let dual = order.compare(&b.complement(), &a.complement())?;
    let pass = match direct {
        Relation::Less => dual.is_le(),
        Relation::Equivalent => dual == Relation::Equivalent,
        Relation::Greater => dual.reverse().is_le(),
    };
    Ok(Check::new(pass, vec![direct, dual]))
}

/// `{0} ⪯ A`.
pub fn check_monotonicity<O: LikelihoodOrder + ?Sized>(order: &O, a: &Subspace) -> Result<Check> {
    let r = order.compare(&Subspace::zero(a.ambient_dim()), a)?;
    Ok(Check::new(r.is_le(), vec![r]))
}

/// With `A₁ ⊥ A₂` and `B₁ ⊥ B₂`: `A_i ⪯ B_i` for both `i` implies
/// `A₁ ⊕ A₂ ⪯ B₁ ⊕ B₂`, strictly so if either premise is strict. Not
/// applicable when a premise fails.
pub fn check_qualitative_additivity<O: LikelihoodOrder + ?Sized>(
    order: &O,
    a1: &Subspace,
    a2: &Subspace,
    b1: &Subspace,
    b2: &Subspace,
) -> Result<Check> {
    require_orthogonal(a1, a2, "A1 and A2")?;
    require_orthogonal(b1, b2, "B1 and B2")?;
    let r1 = order.compare(a1, b1)?;
    let r2 = order.compare(a2, b2)?;
    if !(r1.is_le() && r2.is_le()) {
        return Ok(Check::not_applicable(vec![r1, r2]));
    }
    let s = order.compare(&a1.sum(a2)?, &b1.sum(b2)?)?;
    let strict = r1 == Relation::Less || r2 == Relation::Less;
    let pass = if strict { s == Relation::Less } else { s.is_le() };
    Ok(Check::new(pass, vec![r1, r2, s]))
}

/// Families `A₁..A_n`, `B₁..B_n` with weights `α_i > 0` such that
/// `Σ α_i Π_{A_i} = Σ α_i Π_{B_i}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CancelationInstance {
    pub lhs: Vec<Subspace>,
    pub rhs: Vec<Subspace>,
    pub weights: Vec<f64>,
}

impl CancelationInstance {
    pub fn new(lhs: Vec<Subspace>, rhs: Vec<Subspace>, weights: Vec<f64>) -> Result<Self> {
        let inst = CancelationInstance { lhs, rhs, weights };
        inst.validate()?;
        Ok(inst)
    }

    /// `‖Σ α_i Π_{A_i} − Σ α_i Π_{B_i}‖_max`.
    pub fn residual(&self) -> f64 {
        let d = self.lhs.first().map(Subspace::ambient_dim).unwrap_or(0);
        let mut acc = DMatrix::zeros(d, d);
        for ((a, b), w) in self.lhs.iter().zip(&self.rhs).zip(&self.weights) {
            acc += (a.projection() - b.projection()) * *w;
        }
        linalg::max_abs(&acc)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lhs.len();
        if n == 0 || self.rhs.len() != n || self.weights.len() != n {
            return Err(Error::InvalidInput("cancelation instance needs equal nonzero lengths".into()));
        }
        if self.weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput("cancelation weights must be positive".into()));
        }
        let d = self.lhs[0].ambient_dim();
        for s in self.lhs.iter().chain(&self.rhs) {
            Error::check_dim(d, s.ambient_dim())?;
        }
        let r = self.residual();
        if r > 1e-8 {
            return Err(Error::InvariantViolation(format!("projection sums differ by {r:e}")));
        }
        Ok(())
    }

    /// The same identity read right to left.
    pub fn flipped(&self) -> CancelationInstance {
        CancelationInstance { lhs: self.rhs.clone(), rhs: self.lhs.clone(), weights: self.weights.clone() }
    }
}

fn random_rotation(rng: &mut SeededRng, k: usize) -> DMatrix<f64> {
    random::gaussian_matrix(rng, k, k).qr().q()
}

/// Family (i): lines along two orthonormal bases of one subspace.
fn two_bases(rng: &mut SeededRng, d: usize) -> CancelationInstance {
    let k = rng.random_range(2..=d);
    let s = random::subspace(rng, d, k);
    let q1 = s.basis() * random_rotation(rng, k);
    let q2 = s.basis() * random_rotation(rng, k);
    let lines = |q: &DMatrix<f64>| -> Vec<Subspace> {
        q.column_iter().map(|c| Subspace::line(&c.into_owned()).expect("unit column")).collect()
    };
    CancelationInstance { lhs: lines(&q1), rhs: lines(&q2), weights: vec![1.0; k] }
}

/// Family (ii): `{A, A^⊥}` against `{B, B^⊥}`.
fn complement_pairs(rng: &mut SeededRng, d: usize) -> CancelationInstance {
    let (ka, kb) = (rng.random_range(0..=d), rng.random_range(0..=d));
    let a = random::subspace(rng, d, ka);
    let b = random::subspace(rng, d, kb);
    let (ac, bc) = (a.complement(), b.complement());
    CancelationInstance { lhs: vec![a, ac], rhs: vec![b, bc], weights: vec![1.0, 1.0] }
}

/// Family (iii): `S` against its lines `L_j`, balanced by `{0}` against `S`,
/// all weights scaled by a random rational.
fn refinement(rng: &mut SeededRng, d: usize) -> CancelationInstance {
    let k = rng.random_range(2..=d);
    let s = random::subspace(rng, d, k);
    let scale = rng.random_range(1..=5) as f64 / rng.random_range(1..=5) as f64;
    let mut lhs = Vec::with_capacity(k + 1);
    let mut rhs = Vec::with_capacity(k + 1);
    let mut weights = Vec::with_capacity(k + 1);
    for v in s.basis_vectors() {
        lhs.push(s.clone());
        rhs.push(Subspace::line(&v).expect("unit basis vector"));
        weights.push(scale);
    }
    lhs.push(Subspace::zero(d));
    rhs.push(s);
    weights.push(scale * (k - 1) as f64);
    CancelationInstance { lhs, rhs, weights }
}

/// Description of the cancelation generator families, recorded in reports.
pub const CANCELATION_FAMILIES: &str = "(i) lines along two random orthonormal bases of a random subspace; \
(ii) {A, A^perp} against {B, B^perp}; (iii) a subspace S against its basis lines, balanced by {0} against S \
with weight k-1, all weights scaled by a random rational; each instance is randomly read left to right or right to left";

fn cancelation_instance(d: usize, seed: u64, index: u64) -> CancelationInstance {
    let mut rng = random::stream_rng(seed, index);
    let inst = match index % 3 {
        0 => two_bases(&mut rng, d),
        1 => complement_pairs(&mut rng, d),
        _ => refinement(&mut rng, d),
    };
    if rng.random_bool(0.5) {
        inst.flipped()
    } else {
        inst
    }
}

/// Deterministic instances for `(d, seed)`; instance `i` uses generator family
/// `i mod 3` on its own random stream.
pub fn generate_cancelation_instances(d: usize, seed: u64, count: usize) -> Result<Vec<CancelationInstance>> {
    if d < 2 {
        return Err(Error::InvalidInput("cancelation instances need d >= 2".into()));
    }
    Ok((0..count as u64).map(|i| cancelation_instance(d, seed, i)).collect())
}

/// Fails iff, in the given orientation or with every pair flipped, all
/// `A_i ⪯ B_i` hold with at least one strict. Not applicable when neither
/// orientation satisfies the premise.
pub fn check_cancelation<O: LikelihoodOrder + ?Sized>(order: &O, inst: &CancelationInstance) -> Result<Check> {
    inst.validate()?;
    let relations = inst
        .lhs
        .iter()
        .zip(&inst.rhs)
        .map(|(a, b)| order.compare(a, b))
        .collect::<Result<Vec<_>>>()?;
    let forward = relations.iter().all(|r| r.is_le());
    let backward = relations.iter().all(|r| r.reverse().is_le());
    if !forward && !backward {
        return Ok(Check::not_applicable(relations));
    }
    let pass = relations.iter().all(|r| *r == Relation::Equivalent);
    Ok(Check::new(pass, relations))
}

/// Draws a subspace of `parent`: Haar-random of uniform dimension, aligned
/// with a random coordinate span (or random inside one), or built from one of
/// the order's landmarks `L` as a random subspace of `L ∩ parent`, possibly
/// joined with `L^⊥ ∩ parent`.
pub fn sample_subspace(rng: &mut SeededRng, parent: &Subspace, landmarks: &[Subspace]) -> Subspace {
    let s = draw_within(rng, parent, landmarks);
    if parent.is_full() {
        return s;
    }
    // intersections are only accurate to the rank tolerance; pull the result
    // back into the parent so orthogonality preconditions hold exactly
    let pulled: Vec<_> = (parent.projection() * s.basis()).column_iter().map(|c| c.into_owned()).collect();
    Subspace::span(parent.ambient_dim(), &pulled).expect("same ambient dimension")
}

fn draw_within(rng: &mut SeededRng, parent: &Subspace, landmarks: &[Subspace]) -> Subspace {
    let d = parent.ambient_dim();
    let mode = rng.random_range(0..if landmarks.is_empty() { 4 } else { 6 });
    if mode >= 4 && !parent.is_zero() {
        let l = &landmarks[rng.random_range(0..landmarks.len())];
        let inside = l.intersect(parent).expect("same ambient dimension");
        let k = rng.random_range(0..=inside.rank());
        let part = random::subspace_within(rng, &inside, k);
        return if mode == 5 {
            let outside = l.complement().intersect(parent).expect("same ambient dimension");
            part.sum(&outside).expect("same ambient dimension")
        } else {
            part
        };
    }
    if mode < 2 || parent.is_zero() {
        let k = rng.random_range(0..=parent.rank());
        return random::subspace_within(rng, parent, k);
    }
    let idx: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.5)).collect();
    let coord = Subspace::coordinate(d, &idx).expect("indices in range");
    let host = if parent.is_full() {
        coord
    } else {
        coord.intersect(parent).expect("same ambient dimension")
    };
    if mode == 2 {
        host
    } else {
        let k = rng.random_range(0..=host.rank());
        random::subspace_within(rng, &host, k)
    }
}

/// A configuration on which an axiom failed.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub sample: u64,
    pub subspaces: Vec<Subspace>,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomStats {
    pub axiom: &'static str,
    pub checked: u64,
    pub violations: u64,
    pub not_applicable: u64,
    pub witnesses: Vec<Witness>,
}

impl AxiomStats {
    fn new(axiom: &'static str) -> Self {
        AxiomStats { axiom, checked: 0, violations: 0, not_applicable: 0, witnesses: Vec::new() }
    }

    fn record(&mut self, sample: u64, subspaces: &[&Subspace], result: Result<Check>) -> Result<()> {
        let check = match result {
            Ok(c) => c,
            // finite orders only speak about their carrier
            Err(Error::UnlistedSubspace) => Check::not_applicable(Vec::new()),
            Err(e) => return Err(e),
        };
        match check.outcome {
            Outcome::NotApplicable => self.not_applicable += 1,
            Outcome::Pass => self.checked += 1,
            Outcome::Fail => {
                self.checked += 1;
                self.violations += 1;
                if self.witnesses.len() < MAX_WITNESSES {
                    self.witnesses.push(Witness {
                        sample,
                        subspaces: subspaces.iter().map(|s| (*s).clone()).collect(),
                        relations: check.relations,
                    });
                }
            }
        }
        Ok(())
    }
}

const MAX_WITNESSES: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub order: &'static str,
    pub dim: usize,
    pub seed: u64,
    pub samples: u64,
    pub cancelation_generators: &'static str,
    pub axioms: Vec<AxiomStats>,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn stats(&self, axiom: &str) -> Option<&AxiomStats> {
        self.axioms.iter().find(|a| a.axiom == axiom)
    }

    pub fn total_violations(&self) -> u64 {
        self.axioms.iter().map(|a| a.violations).sum()
    }

    /// Violations of de Finetti, Negation and Monotonicity.
    pub fn standard_violations(&self) -> u64 {
        ["definetti", "negation", "monotonicity"]
            .iter()
            .filter_map(|n| self.stats(n))
            .map(|a| a.violations)
            .sum()
    }
}

fn carrier_pick(rng: &mut SeededRng, carrier: &[Subspace]) -> Subspace {
    carrier.choose(rng).expect("carrier is nonempty").clone()
}

/// Runs every checker on `samples` seeded configurations in `R^d`.
///
/// Sample `i` draws all its subspaces from the stream `(seed, i)`, so the
/// report does not depend on evaluation order. Finite orders are sampled from
/// their listed subspaces; comparisons that leave the list count as not
/// applicable.
pub fn audit<O: LikelihoodOrder + ?Sized>(order: &O, d: usize, seed: u64, samples: u64) -> Result<AuditReport> {
    Error::check_dim(order.ambient_dim(), d)?;
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    let carrier: Option<Vec<Subspace>> = match order.carrier() {
        Some(c) if !c.is_empty() => Some(c),
        _ => None,
    };
    let landmarks = order.landmarks();
    let mut definetti = AxiomStats::new("definetti");
    let mut negation = AxiomStats::new("negation");
    let mut monotone = AxiomStats::new("monotonicity");
    let mut additivity = AxiomStats::new("qualitative_additivity");
    let mut cancel = AxiomStats::new("cancelation");
    let full = Subspace::full(d);

    for i in 0..samples {
        let mut rng = random::stream_rng(seed, i);
        let draw = |rng: &mut SeededRng, parent: &Subspace| match &carrier {
            Some(c) => carrier_pick(rng, c),
            None => sample_subspace(rng, parent, &landmarks),
        };

        let c = draw(&mut rng, &full);
        let c_perp = c.complement();
        let (a, b) = if carrier.is_some() {
            (draw(&mut rng, &full), draw(&mut rng, &full))
        } else {
            (sample_subspace(&mut rng, &c_perp, &landmarks), sample_subspace(&mut rng, &c_perp, &landmarks))
        };
        let result = if carrier.is_some() && !(a.is_orthogonal(&c)? && b.is_orthogonal(&c)?) {
            Ok(Check::not_applicable(Vec::new()))
        } else {
            check_definetti(order, &a, &b, &c)
        };
        definetti.record(i, &[&a, &b, &c], result)?;

        let (x, y) = (draw(&mut rng, &full), draw(&mut rng, &full));
        negation.record(i, &[&x, &y], check_negation(order, &x, &y))?;

        monotone.record(i, &[&x], check_monotonicity(order, &x))?;

        let a1 = draw(&mut rng, &full);
        let a2 = sample_subspace(&mut rng, &a1.complement(), &landmarks);
        let b1 = draw(&mut rng, &full);
        let b2 = sample_subspace(&mut rng, &b1.complement(), &landmarks);
        // swapping the two sides keeps both orthogonality premises
        let swap = matches!(order.compare(&a1, &b1), Ok(Relation::Greater))
            && matches!(order.compare(&a2, &b2), Ok(Relation::Greater));
        let (a1, a2, b1, b2) = if swap { (b1, b2, a1, a2) } else { (a1, a2, b1, b2) };
        additivity.record(i, &[&a1, &a2, &b1, &b2], check_qualitative_additivity(order, &a1, &a2, &b1, &b2))?;

        if d >= 2 {
            let inst = cancelation_instance(d, seed ^ 0x9e37_79b9_7f4a_7c15, i);
            let parts: Vec<&Subspace> = inst.lhs.iter().chain(&inst.rhs).collect();
            cancel.record(i, &parts, check_cancelation(order, &inst))?;
        }
    }

    let mut notes = Vec::new();
    if order.kind() == "example31" {
        notes.push(
            "planes at equal pole weight are ranked by pole membership, then by the equator score; \
this completes cases the defining case split leaves open"
                .to_string(),
        );
    }
    Ok(AuditReport {
        order: order.kind(),
        dim: d,
        seed,
        samples,
        cancelation_generators: CANCELATION_FAMILIES,
        axioms: vec![definetti, negation, monotone, additivity, cancel],
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::Example31Order;
    use crate::measures::{pure_state, uniform};
    use crate::orders::order_from_measure;
    use crate::tol;
    use nalgebra::DVector;

    fn e(d: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        v
    }

    #[test]
    fn trivial_cases_pass() {
        let mut rng = random::stream_rng(2, 0);
        let t = random::density(&mut rng, 3);
        let o = order_from_measure(t, tol::EQ_TOL).unwrap();
        let a = random::subspace(&mut rng, 3, 1);
        let b = random::subspace(&mut rng, 3, 2);
        assert!(check_definetti(&o, &a, &b, &Subspace::zero(3)).unwrap().passed());
        assert!(check_negation(&o, &a, &a).unwrap().passed());
        assert!(check_monotonicity(&o, &Subspace::zero(3)).unwrap().passed());
        let z = Subspace::zero(3);
        assert!(check_qualitative_additivity(&o, &a, &z, &a, &z).unwrap().passed());
        let same = CancelationInstance::new(vec![a.clone(), b.clone()], vec![a, b], vec![1.0, 2.0]).unwrap();
        assert!(check_cancelation(&o, &same).unwrap().passed());
    }

    #[test]
    fn definetti_requires_orthogonality() {
        let o = order_from_measure(uniform(3).unwrap(), tol::EQ_TOL).unwrap();
        let a = Subspace::line(&e(3, 0)).unwrap();
        let r = check_definetti(&o, &a, &a, &a);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn complement_pair_example_sums_to_identity() {
        let a = Subspace::line(&e(3, 0)).unwrap();
        let b = Subspace::line(&(e(3, 0) + e(3, 1))).unwrap();
        let inst = CancelationInstance::new(vec![a.clone(), a.complement()], vec![b.clone(), b.complement()], vec![1.0, 1.0]);
        assert!(inst.is_ok());
        let broken = CancelationInstance::new(vec![a.clone()], vec![b], vec![1.0]);
        assert!(matches!(broken, Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn generated_instances_satisfy_identity() {
        for d in 2..=5 {
            for inst in generate_cancelation_instances(d, 11, 60).unwrap() {
                assert!(inst.residual() <= 1e-10, "residual {}", inst.residual());
            }
        }
        assert!(generate_cancelation_instances(1, 0, 1).is_err());
    }

    #[test]
    fn audit_is_deterministic() {
        let o = order_from_measure(pure_state(&e(3, 2)).unwrap(), tol::EQ_TOL).unwrap();
        let r1 = serde_json::to_string(&audit(&o, 3, 5, 60).unwrap()).unwrap();
        let r2 = serde_json::to_string(&audit(&o, 3, 5, 60).unwrap()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn example31_negation_fails_on_equator_lines() {
        let o = Example31Order::with_pole(&e(3, 2)).unwrap();
        let a = Subspace::line(&DVector::from_vec(vec![0.2f64.cos(), 0.2f64.sin(), 0.0])).unwrap();
        let b = Subspace::line(&DVector::from_vec(vec![0.3f64.cos(), 0.3f64.sin(), 0.0])).unwrap();
        assert!(!check_negation(&o, &a, &b).unwrap().passed());
    }
}
