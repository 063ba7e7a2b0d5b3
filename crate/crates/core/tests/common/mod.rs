//! Oracles shared by the integration tests. Each one recomputes a quantity
//! by a route that does not go through the library's closed forms.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qlike::orders::order_from_measure;
use qlike::random::{self, stream_rng};
use qlike::representation::RepresentationProblem;
use qlike::sphere::SphereFrame;
use qlike::{DensityOperator, LikelihoodOrder, Relation, Subspace};
use rand::Rng;

/// Distance from `x` to the unit ball of `s`, by projected gradient on the
/// coefficient ball. Does not assume the nearest point is `Π_S x`.
pub fn distance_to_ball(x: &DVector<f64>, s: &Subspace) -> f64 {
    if s.is_zero() {
        return x.norm();
    }
    let b = s.basis();
    let mut c = DVector::zeros(b.ncols());
    for _ in 0..200 {
        let grad = b.transpose() * (b * &c - x);
        let mut next = &c - grad;
        let n = next.norm();
        if n > 1.0 {
            next /= n;
        }
        let moved = (&next - &c).norm();
        c = next;
        if moved < 1e-15 {
            break;
        }
    }
    (x - b * c).norm()
}

fn sample_ball_boundary<R: Rng>(rng: &mut R, s: &Subspace) -> DVector<f64> {
    let coeffs = random::unit_vector(rng, s.rank());
    s.basis() * coeffs
}

/// One side of the set-based distance: `sup_{x ∈ A ∩ U} dist(x, B ∩ U)`, by
/// sampling the unit sphere of `A` and refining the best sample by a random
/// local search.
fn one_sided<R: Rng>(rng: &mut R, a: &Subspace, b: &Subspace, samples: usize) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let mut best_c = random::unit_vector(rng, a.rank());
    let mut best = distance_to_ball(&(a.basis() * &best_c), b);
    for _ in 0..samples {
        let x = sample_ball_boundary(rng, a);
        let v = distance_to_ball(&x, b);
        if v > best {
            best = v;
            best_c = a.basis().transpose() * x;
        }
    }
    let mut step = 0.05;
    for _ in 0..400 {
        let trial = (&best_c + random::gaussian_vector(rng, a.rank()) * step).normalize();
        let v = distance_to_ball(&(a.basis() * &trial), b);
        if v > best {
            best = v;
            best_c = trial;
        } else {
            step *= 0.98;
        }
    }
    best
}

pub fn hausdorff_oracle(a: &Subspace, b: &Subspace, samples: usize, seed: u64) -> f64 {
    let mut rng = stream_rng(seed, 7);
    one_sided(&mut rng, a, b, samples).max(one_sided(&mut rng, b, a, samples))
}

/// Null space of the stacked constraints `(I − Π_A) x = 0`, `(I − Π_B) x = 0`,
/// read off the eigenvectors of the stacked Gram matrix.
pub fn intersection_oracle(a: &Subspace, b: &Subspace) -> Subspace {
    let d = a.ambient_dim();
    let id = DMatrix::<f64>::identity(d, d);
    let top = &id - a.projection();
    let bottom = &id - b.projection();
    let mut stacked = DMatrix::zeros(2 * d, d);
    stacked.view_mut((0, 0), (d, d)).copy_from(&top);
    stacked.view_mut((d, 0), (d, d)).copy_from(&bottom);
    let gram = stacked.transpose() * stacked;
    let eig = gram.symmetric_eigen();
    let null: Vec<DVector<f64>> = (0..d)
        .filter(|&i| eig.eigenvalues[i].abs() < 1e-8)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    Subspace::span(d, &null).unwrap()
}

/// A random measure over `count` random proper subspaces whose `μ` values are
/// pairwise at least `gap` apart, as a problem over all pairs.
pub fn gapped_problem(seed: u64, d: usize, count: usize, gap: f64) -> (DensityOperator, Vec<Subspace>, RepresentationProblem) {
    let mut rng = stream_rng(seed, 0);
    loop {
        let t = random::density(&mut rng, d);
        let subs: Vec<Subspace> = (0..count)
            .map(|_| {
                let k = rng.random_range(1..d);
                random::subspace(&mut rng, d, k)
            })
            .collect();
        let mu: Vec<f64> = subs.iter().map(|s| t.mu(s).unwrap()).collect();
        let separated = (0..count).all(|i| (i + 1..count).all(|j| (mu[i] - mu[j]).abs() >= gap));
        if separated {
            let order = order_from_measure(t.clone(), 1e-12).unwrap();
            let prob = RepresentationProblem::from_order(&order, &subs, true).unwrap();
            return (t, subs, prob);
        }
    }
}

/// Any `T` restricted to the equator plane weighs the line at angle `φ` by
/// `a + b cos 2(φ − ψ)`. Scans `ψ` over a fine grid and both signs of `b` for
/// an assignment reproducing every strict and tied pair among `lines`.
pub fn equator_pattern_realizable(order: &dyn LikelihoodOrder, frame: &SphereFrame, lines: &[Subspace]) -> bool {
    let angles: Vec<f64> = lines.iter().map(|l| frame.angle(&l.basis().column(0).into_owned())).collect();
    let mut rel = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            rel.push((i, j, order.compare(&lines[i], &lines[j]).unwrap()));
        }
    }
    for k in 0..20_000 {
        let psi = k as f64 * std::f64::consts::PI / 20_000.0;
        for sign in [1.0, -1.0] {
            let w: Vec<f64> = angles.iter().map(|a| sign * (2.0 * (a - psi)).cos()).collect();
            let ok = rel.iter().all(|&(i, j, r)| match r {
                Relation::Less => w[i] < w[j],
                Relation::Greater => w[i] > w[j],
                Relation::Equivalent => (w[i] - w[j]).abs() < 1e-12,
            });
            if ok {
                return true;
            }
        }
    }
    false
}

/// `a + b√2` with integer parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zr2(pub i64, pub i64);

impl Zr2 {
    pub fn from_f64(x: f64) -> Zr2 {
        for b in -3i64..=3 {
            let a = x - b as f64 * std::f64::consts::SQRT_2;
            if (a - a.round()).abs() < 1e-9 {
                return Zr2(a.round() as i64, b);
            }
        }
        panic!("{x} is not in Z[√2] with small coefficients")
    }

    pub fn mul(self, o: Zr2) -> Zr2 {
        Zr2(self.0 * o.0 + 2 * self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }

    pub fn add(self, o: Zr2) -> Zr2 {
        Zr2(self.0 + o.0, self.1 + o.1)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0 && self.1 == 0
    }
}

pub fn exact_dot(u: &[f64; 3], v: &[f64; 3]) -> Zr2 {
    (0..3).fold(Zr2(0, 0), |acc, i| acc.add(Zr2::from_f64(u[i]).mul(Zr2::from_f64(v[i]))))
}

/// Exact orthogonal pairs and triples of a ray list in `Z[√2]³`.
pub fn exact_orthogonality(rays: &[[f64; 3]]) -> (usize, usize) {
    let n = rays.len();
    let orth = |i: usize, j: usize| exact_dot(&rays[i], &rays[j]).is_zero();
    let mut pairs = 0;
    let mut triples = 0;
    for i in 0..n {
        for j in i + 1..n {
            if !orth(i, j) {
                continue;
            }
            pairs += 1;
            for k in j + 1..n {
                if orth(i, k) && orth(j, k) {
                    triples += 1;
                }
            }
        }
    }
    (pairs, triples)
}

/// True when `p` gives `B` strictly more mass than `A` on every listed pair.
pub fn satisfies(p: &[f64], strict: &[(Vec<usize>, Vec<usize>)]) -> bool {
    strict.iter().all(|(a, b)| b.iter().map(|&i| p[i]).sum::<f64>() > a.iter().map(|&i| p[i]).sum::<f64>())
}

/// The four-pair system over `{a, b, c, d, e}` used as the classical
/// counterexample, with elements numbered 0..5.
pub fn five_point_system() -> Vec<(Vec<usize>, Vec<usize>)> {
    let (a, b, c, d, e) = (0, 1, 2, 3, 4);
    vec![(vec![a, c], vec![d]), (vec![a, d], vec![b, c]), (vec![c, d], vec![a, e]), (vec![b, e], vec![a, c, d])]
}

pub fn indicator_sum(sets: &[&Vec<usize>], n: usize) -> Vec<i64> {
    let mut s = vec![0; n];
    for set in sets {
        for &i in set.iter() {
            s[i] += 1;
        }
    }
    s
}

/// Bitmask of the listed elements.
pub fn mask(set: &[usize]) -> u32 {
    set.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn members(m: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| m & (1 << i) != 0).collect()
}

/// A complete order on the subsets of `{0, …, n−1}`: subsets compare by
/// integer weight, and weight ties between distinct sets are broken by an
/// orientation of the disjoint pair `(S \ T, T \ S)`. Comparing through the
/// disjoint parts makes de Finetti's axiom hold by construction.
#[derive(Debug, Clone)]
pub struct TieBrokenOrder {
    pub n: usize,
    pub weights: Vec<u32>,
    /// Disjoint tied pairs `(x, y)` with `x ≺ y`.
    pub below: Vec<(u32, u32)>,
}

impl TieBrokenOrder {
    fn weight(&self, m: u32) -> u32 {
        (0..self.n).filter(|i| m & (1 << i) != 0).map(|i| self.weights[i]).sum()
    }

    pub fn compare(&self, s: u32, t: u32) -> Relation {
        let (ws, wt) = (self.weight(s), self.weight(t));
        if ws != wt {
            return if ws < wt { Relation::Less } else { Relation::Greater };
        }
        let (x, y) = (s & !t, t & !s);
        if x == y {
            Relation::Equivalent
        } else if self.below.contains(&(x, y)) {
            Relation::Less
        } else {
            Relation::Greater
        }
    }

    /// Every strict pair `A ≺ B` between distinct subsets.
    pub fn strict_pairs(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let all = 1u32 << self.n;
        let mut out = Vec::new();
        for s in 0..all {
            for t in 0..all {
                if self.compare(s, t) == Relation::Less {
                    out.push((members(s, self.n), members(t, self.n)));
                }
            }
        }
        out
    }

    /// Completeness is built in; checks transitivity on every triple.
    pub fn is_transitive(&self) -> bool {
        let all = 1u32 << self.n;
        for s in 0..all {
            for t in 0..all {
                if !self.compare(s, t).is_le() {
                    continue;
                }
                for u in 0..all {
                    if self.compare(t, u).is_le() && !self.compare(s, u).is_le() {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Searches nondecreasing weight vectors in `1..=max_w` and strict
/// orientations of their tied disjoint pairs for a transitive order in which
/// some strict pairs `A_i ≺ B_i` satisfy `Σ 1_{A_i} = Σ 1_{B_i}`, which no
/// additive probability can represent. Returns the order and those pairs.
pub fn find_cancelation_violating_order(n: usize, max_w: u32) -> Option<(TieBrokenOrder, Vec<(u32, u32)>)> {
    let mut weights = vec![1u32; n];
    loop {
        if let Some(found) = try_weights(n, &weights) {
            return Some(found);
        }
        // next nondecreasing vector
        let mut i = n;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if weights[i] < max_w {
                weights[i] += 1;
                let v = weights[i];
                weights[i..].iter_mut().for_each(|w| *w = v);
                break;
            }
        }
    }
}

fn try_weights(n: usize, weights: &[u32]) -> Option<(TieBrokenOrder, Vec<(u32, u32)>)> {
    let all = 1u32 << n;
    let weight = |m: u32| -> u32 { (0..n).filter(|i| m & (1 << i) != 0).map(|i| weights[i]).sum() };
    let mut tied = Vec::new();
    for x in 1..all {
        for y in x + 1..all {
            if x & y == 0 && weight(x) == weight(y) {
                tied.push((x, y));
            }
        }
    }
    if tied.len() < 2 || tied.len() > 12 {
        return None;
    }
    for bits in 0u32..(1 << tied.len()) {
        let oriented: Vec<(u32, u32)> = tied
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| if bits & (1 << k) != 0 { (y, x) } else { (x, y) })
            .collect();
        // indicator-sum identity over a nonempty subfamily
        let Some(family) = (1u32..(1 << oriented.len())).find(|&f| {
            let mut diff = vec![0i32; n];
            for (k, &(x, y)) in oriented.iter().enumerate() {
                if f & (1 << k) != 0 {
                    for (i, d) in diff.iter_mut().enumerate() {
                        *d += ((y >> i) & 1) as i32 - ((x >> i) & 1) as i32;
                    }
                }
            }
            diff.iter().all(|d| *d == 0)
        }) else {
            continue;
        };
        let order = TieBrokenOrder { n, weights: weights.to_vec(), below: oriented.clone() };
        if order.is_transitive() {
            let pairs = oriented.iter().enumerate().filter(|(k, _)| family & (1 << k) != 0).map(|(_, p)| *p).collect();
            return Some((order, pairs));
        }
    }
    None
}
