use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::axioms::{self, AuditReport};
use crate::error::{Error, Result};
use crate::linalg;
use crate::measures::DensityOperator;
use crate::orders::{LikelihoodOrder, Relation};
use crate::random::{self, SeededRng};
use crate::subspace::Subspace;

// streams for the pair samplers, disjoint from the audit's (seed, i) streams
const PAIR_STREAM: u64 = 1 << 40;
const LINE_STREAM: u64 = 2 << 40;

#[derive(Debug, Clone, Serialize)]
pub struct Counter2Probe {
    /// Top eigenvector of `Π_U T Π_U` inside `U`.
    #[serde(serialize_with = "crate::linalg::plain::vector")]
    pub x: DVector<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub samples: usize,
    /// Whether the sampled lines of `U` are ordered by `|⟨x, y⟩|`.
    pub monotone: bool,
}

/// Restricts `T` to the plane `U` and checks that lines of `U` compare like
/// `|⟨x, y⟩|` for the top eigenvector `x`.
pub fn counter2_probe(t: &DensityOperator, u: &Subspace, samples: usize) -> Result<Counter2Probe> {
    Error::check_dim(t.dim(), u.ambient_dim())?;
    if u.rank() != 2 {
        return Err(Error::Precondition(format!("plane expected, got dimension {}", u.rank())));
    }
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two sample lines".into()));
    }
    let b = u.basis();
    let restricted = b.transpose() * t.matrix() * b;
    let (values, vectors) = linalg::sorted_eigen(&restricted);
    let x = b * vectors.column(1);
    let (alpha, beta) = (values[1], values[0]);

    let lines: Vec<(f64, f64)> = (0..samples)
        .map(|j| {
            let th = j as f64 * std::f64::consts::PI / samples as f64;
            let y = b * DVector::from_vec(vec![th.cos(), th.sin()]);
            ((y.transpose() * t.matrix() * &y)[0], x.dot(&y).abs())
        })
        .collect();
    let slack = 1e-10;
    let monotone = lines.iter().all(|&(mu_i, c_i)| {
        lines
            .iter()
            .all(|&(mu_j, c_j)| !(c_i < c_j - slack && mu_i > mu_j + slack) && !(c_i > c_j + slack && mu_i < mu_j - slack))
    });
    Ok(Counter2Probe { x, alpha, beta, samples, monotone })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairDisagreement {
    pub a: Subspace,
    pub b: Subspace,
    pub expected: Relation,
    pub found: Relation,
}

#[derive(Debug, Clone, Serialize)]
pub struct PureStateReport {
    pub audit: AuditReport,
    pub pole_equivalent_to_whole: bool,
    pub nontrivial: bool,
    pub premises_hold: bool,
    pub pairs_sampled: u64,
    pub gap_separated_pairs: u64,
    pub disagreements: u64,
    pub witnesses: Vec<PairDisagreement>,
    pub conclusion_holds: bool,
}

/// Checks the premises of the pure-state characterization on samples
/// (standard axioms, `span{p} ∼ H`, some `A ≻ {0}`) and compares the order with
/// `‖Π_A p‖²` on sampled pairs whose values differ by at least `1e-6`.
pub fn pure_state_theorem_check<O: LikelihoodOrder + ?Sized>(
    order: &O,
    p: &DVector<f64>,
    d: usize,
    samples: u64,
    seed: u64,
) -> Result<PureStateReport> {
    Error::check_dim(d, p.len())?;
    Error::check_dim(order.ambient_dim(), d)?;
    let n = p.norm();
    if n == 0.0 {
        return Err(Error::InvalidInput("pole must be nonzero".into()));
    }
    let p = p / n;
    let audit = axioms::audit(order, d, seed, samples)?;
    let full = Subspace::full(d);
    let zero = Subspace::zero(d);
    let landmarks = order.landmarks();
    let pole_equivalent_to_whole = order.compare(&Subspace::line(&p)?, &full)? == Relation::Equivalent;
    let mut nontrivial = order.compare(&zero, &full)? == Relation::Less;

    let weight = |s: &Subspace| s.project(&p).norm_squared();
    let mut gap_separated = 0;
    let mut disagreements = 0;
    let mut witnesses = Vec::new();
    for i in 0..samples {
        let mut rng = random::stream_rng(seed, PAIR_STREAM + i);
        let a = axioms::sample_subspace(&mut rng, &full, &landmarks);
        let b = axioms::sample_subspace(&mut rng, &full, &landmarks);
        if !nontrivial && order.compare(&zero, &a)? == Relation::Less {
            nontrivial = true;
        }
        let (wa, wb) = (weight(&a), weight(&b));
        if (wa - wb).abs() < 1e-6 {
            continue;
        }
        gap_separated += 1;
        let expected = if wa < wb { Relation::Less } else { Relation::Greater };
        let found = order.compare(&a, &b)?;
        if found != expected {
            disagreements += 1;
            if witnesses.len() < 8 {
                witnesses.push(PairDisagreement { a, b, expected, found });
            }
        }
    }
    let premises_hold = audit.standard_violations() == 0 && pole_equivalent_to_whole && nontrivial;
    Ok(PureStateReport {
        audit,
        pole_equivalent_to_whole,
        nontrivial,
        premises_hold,
        pairs_sampled: samples,
        gap_separated_pairs: gap_separated,
        disagreements,
        witnesses,
        conclusion_holds: disagreements == 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TripleCheck {
    pub independent: bool,
    pub equal_minimal: bool,
    pub mu: [f64; 3],
    pub min_eigenvalue: f64,
    /// `‖T − I/3‖_max`.
    pub deviation_from_uniform: f64,
    /// Premises imply `‖T − I/3‖_max ≤ 1e-6`.
    pub holds: bool,
}

impl TripleCheck {
    pub fn premises_hold(&self) -> bool {
        self.independent && self.equal_minimal
    }
}

/// For `T` on `R³` and a basis `u₁, u₂, u₃` whose lines all attain the
/// minimum of `μ` over lines, `T` must be `I/3`.
pub fn triple_basis_check(t: &DensityOperator, u: &[DVector<f64>; 3]) -> Result<TripleCheck> {
    Error::check_dim(3, t.dim())?;
    for v in u {
        Error::check_dim(3, v.len())?;
    }
    let cols: Vec<DVector<f64>> = u.iter().map(|v| v.normalize()).collect();
    let m = DMatrix::from_columns(&cols);
    let independent = cols.iter().all(|v| v.iter().all(|x| x.is_finite())) && m.determinant().abs() > 1e-9;
    let mu_of = |v: &DVector<f64>| (v.transpose() * t.matrix() * v)[0];
    let mu = [mu_of(&cols[0]), mu_of(&cols[1]), mu_of(&cols[2])];
    let min_eigenvalue = t.min_eigenvalue();
    let equal_minimal = mu.iter().all(|m| (m - min_eigenvalue).abs() <= 1e-9);
    let deviation = linalg::max_abs(&(t.matrix() - DMatrix::identity(3, 3) / 3.0));
    let premises = independent && equal_minimal;
    Ok(TripleCheck {
        independent,
        equal_minimal,
        mu,
        min_eigenvalue,
        deviation_from_uniform: deviation,
        holds: !premises || deviation <= 1e-6,
    })
}

/// Searches `samples` random lines plus the eigenvectors of `T` for three
/// linearly independent lines attaining `min μ` within `1e-9`.
pub fn find_equal_minimal_triple(t: &DensityOperator, samples: usize, seed: u64) -> Result<Option<[DVector<f64>; 3]>> {
    Error::check_dim(3, t.dim())?;
    let lam = t.min_eigenvalue();
    let (_, vectors) = linalg::sorted_eigen(t.matrix());
    let mut rng = random::stream_rng(seed, LINE_STREAM);
    let candidates = vectors
        .column_iter()
        .map(|c| c.into_owned())
        .chain((0..samples).map(|_| random::unit_vector(&mut rng, 3)));
    let mut chosen: Vec<DVector<f64>> = Vec::new();
    for v in candidates {
        let mu = (v.transpose() * t.matrix() * &v)[0];
        if mu > lam + 1e-9 {
            continue;
        }
        let mut trial = chosen.clone();
        trial.push(v);
        let m = DMatrix::from_columns(&trial);
        let gram_det = (m.transpose() * &m).determinant();
        if gram_det > 1e-12 {
            chosen = trial;
            if chosen.len() == 3 {
                return Ok(Some([chosen[0].clone(), chosen[1].clone(), chosen[2].clone()]));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformReport {
    pub lines_equivalent: bool,
    pub nontrivial: bool,
    pub pairs_checked: u64,
    pub dimension_disagreements: u64,
    pub triple: Option<TripleCheck>,
}

impl UniformReport {
    /// All lines equivalent and non-trivial, and then ordered by dimension.
    pub fn is_uniform(&self) -> bool {
        self.lines_equivalent && self.nontrivial && self.dimension_disagreements == 0
    }
}

fn dimension_relation(a: &Subspace, b: &Subspace) -> Relation {
    Relation::from_values(a.rank() as f64, b.rank() as f64, 0.0)
}

/// If all sampled lines are equivalent and the order is non-trivial, checks
/// that sampled pairs compare by dimension. For measure orders on `R³` also
/// searches for an equal-minimal basis and runs [`triple_basis_check`] on it.
pub fn uniform_characterization_check<O: LikelihoodOrder + ?Sized>(
    order: &O,
    d: usize,
    samples: u64,
    seed: u64,
) -> Result<UniformReport> {
    Error::check_dim(order.ambient_dim(), d)?;
    let carrier = order.carrier();
    let landmarks = order.landmarks();
    let mut rng = random::stream_rng(seed, LINE_STREAM + 1);
    let pick = |rng: &mut SeededRng, rank: Option<usize>| -> Option<Subspace> {
        match &carrier {
            Some(c) => {
                let pool: Vec<&Subspace> = c.iter().filter(|s| rank.is_none_or(|k| s.rank() == k)).collect();
                if pool.is_empty() {
                    None
                } else {
                    Some(pool[rng.random_range(0..pool.len())].clone())
                }
            }
            None => Some(match rank {
                Some(k) => random::subspace(rng, d, k),
                None => axioms::sample_subspace(rng, &Subspace::full(d), &landmarks),
            }),
        }
    };

    let zero = Subspace::zero(d);
    let full = Subspace::full(d);
    let nontrivial = order.compare(&zero, &full)? == Relation::Less;
    let mut lines_equivalent = true;
    if let Some(first) = pick(&mut rng, Some(1)) {
        for _ in 0..samples {
            let other = pick(&mut rng, Some(1)).expect("pool is nonempty");
            if order.compare(&first, &other)? != Relation::Equivalent {
                lines_equivalent = false;
                break;
            }
        }
    }

    let mut pairs_checked = 0;
    let mut disagreements = 0;
    if lines_equivalent && nontrivial {
        for _ in 0..samples {
            let (Some(a), Some(b)) = (pick(&mut rng, None), pick(&mut rng, None)) else { break };
            pairs_checked += 1;
            if order.compare(&a, &b)? != dimension_relation(&a, &b) {
                disagreements += 1;
            }
        }
    }

    let triple = match order.density() {
        Some(t) if d == 3 => match find_equal_minimal_triple(t, samples as usize, seed)? {
            Some(u) => Some(triple_basis_check(t, &u)?),
            None => None,
        },
        _ => None,
    };
    Ok(UniformReport { lines_equivalent, nontrivial, pairs_checked, dimension_disagreements: disagreements, triple })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PropertyReport {
    pub checked: u64,
    pub violations: u64,
}

fn in_plane_complement(plane: &Subspace, line: &Subspace) -> Result<Subspace> {
    plane.intersect(&line.complement())
}

/// Coplanar lines `q ⪯ r` must have in-plane complements with `r' ⪯ q'`.
pub fn claim0_check<O: LikelihoodOrder + ?Sized>(order: &O, samples: u64, seed: u64) -> Result<PropertyReport> {
    let d = order.ambient_dim();
    if d < 2 {
        return Err(Error::InvalidInput("need dimension >= 2".into()));
    }
    let mut report = PropertyReport::default();
    for i in 0..samples {
        let mut rng = random::stream_rng(seed, LINE_STREAM + 2 + i);
        let plane = random::subspace(&mut rng, d, 2);
        let mut q = random::subspace_within(&mut rng, &plane, 1);
        let mut r = random::subspace_within(&mut rng, &plane, 1);
        if order.compare(&q, &r)? == Relation::Greater {
            std::mem::swap(&mut q, &mut r);
        }
        let (qc, rc) = (in_plane_complement(&plane, &q)?, in_plane_complement(&plane, &r)?);
        report.checked += 1;
        if !order.compare(&rc, &qc)?.is_le() {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// With `M = span{p}` and `m` a line orthogonal to `p`: for `u ∼ M` and
/// `v ∼ m` spanning a plane, the in-plane complements satisfy `u' ∼ M` and
/// `v' ∼ m`.
pub fn mm_tags_check<O: LikelihoodOrder + ?Sized>(
    order: &O,
    p: &DVector<f64>,
    samples: u64,
    seed: u64,
) -> Result<PropertyReport> {
    let d = order.ambient_dim();
    Error::check_dim(d, p.len())?;
    let big = Subspace::line(p)?;
    let equator = big.complement();
    let mut report = PropertyReport::default();
    for i in 0..samples {
        let mut rng = random::stream_rng(seed, LINE_STREAM + (1 << 20) + i);
        let small = random::subspace_within(&mut rng, &equator, 1);
        // u ∼ M is forced to be the pole line; pick v among lines ∼ m
        let u = Subspace::line(&(p * if rng.random_bool(0.5) { 1.0 } else { -1.0 }))?;
        let v = random::subspace_within(&mut rng, &equator, 1);
        if order.compare(&u, &big)? != Relation::Equivalent || order.compare(&v, &small)? != Relation::Equivalent {
            continue;
        }
        let plane = u.sum(&v)?;
        let (uc, vc) = (in_plane_complement(&plane, &u)?, in_plane_complement(&plane, &v)?);
        report.checked += 1;
        if order.compare(&uc, &small)? != Relation::Equivalent || order.compare(&vc, &big)? != Relation::Equivalent {
            report.violations += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{mixture, pure_state, uniform};
    use crate::orders::order_from_measure;
    use crate::tol;

    fn e(i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(3);
        v[i] = 1.0;
        v
    }

    #[test]
    fn probe_on_uniform_is_vacuous() {
        let t = uniform(3).unwrap();
        let u = Subspace::coordinate(3, &[0, 1]).unwrap();
        let probe = counter2_probe(&t, &u, 90).unwrap();
        assert!((probe.alpha - probe.beta).abs() < 1e-12);
        assert!(probe.monotone);
        assert!(counter2_probe(&t, &Subspace::line(&e(0)).unwrap(), 10).is_err());
    }

    #[test]
    fn probe_on_pure_state_points_at_pole() {
        let p = DVector::from_vec(vec![0.6, 0.0, 0.8]);
        let t = pure_state(&p).unwrap();
        let u = Subspace::coordinate(3, &[0, 2]).unwrap();
        let probe = counter2_probe(&t, &u, 180).unwrap();
        assert!((probe.x.dot(&p).abs() - 1.0).abs() < 1e-10);
        assert!(probe.monotone);
    }

    #[test]
    fn mixture_fails_pole_premise() {
        let p = e(2);
        let t = mixture(&[0.9, 0.1], &[pure_state(&p).unwrap(), uniform(3).unwrap()]).unwrap();
        let o = order_from_measure(t, tol::EQ_TOL).unwrap();
        let r = pure_state_theorem_check(&o, &p, 3, 50, 1).unwrap();
        assert!(!r.pole_equivalent_to_whole);
        assert!(!r.premises_hold);
        let u = order_from_measure(uniform(3).unwrap(), tol::EQ_TOL).unwrap();
        assert!(!pure_state_theorem_check(&u, &p, 3, 20, 1).unwrap().pole_equivalent_to_whole);
    }

    #[test]
    fn uniform_triple_example() {
        let t = uniform(3).unwrap();
        let diag = DVector::from_vec(vec![1.0, 1.0, 1.0]) / 3f64.sqrt();
        let c = triple_basis_check(&t, &[e(0), e(1), diag]).unwrap();
        assert!(c.premises_hold());
        assert!(c.holds);
        assert!(c.deviation_from_uniform < 1e-15);
    }
}
