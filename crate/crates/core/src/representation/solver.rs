//! Max-min margin over density operators.
//!
//! Primal: maximize `ε` over symmetric `T` with `T ⪰ 0`, `tr T = 1`,
//! `⟨E_j, T⟩ = 0` and `⟨D_i, T⟩ ≥ ε`. The solver works on the dual
//!
//! ```text
//! min τ  s.t.  Σ λ_i D_i + Σ c_j E_j + Σ ν_k v_k v_kᵀ = τ I,  Σ λ_i = 1,  λ, ν ≥ 0
//! ```
//!
//! whose PSD cone is replaced by finitely many rank-one cuts `v vᵀ`. The
//! simplex multipliers of the matrix rows give the primal `T`; eigenvectors of
//! `T` with negative eigenvalue become new cut columns. Any dual iterate
//! `(λ, c)` bounds the optimum by `λ_max(Σ λ_i D_i + Σ c_j E_j)`; any density
//! operator bounds it from below by its own verified margin.

use nalgebra::{DMatrix, DVector};

use super::simplex::{Simplex, Status};
use crate::error::{Error, Result};
use crate::linalg;

/// λ, c, the certificate matrix and the bound it proves.
type Dual = (Vec<f64>, Vec<f64>, DMatrix<f64>, f64);

#[derive(Debug, Clone, Copy)]
pub(crate) enum Geometry {
    /// All symmetric `d × d` matrices.
    Full(usize),
    /// Diagonal matrices only.
    Diagonal(usize),
}

impl Geometry {
    fn dim(&self) -> usize {
        match *self {
            Geometry::Full(d) | Geometry::Diagonal(d) => d,
        }
    }

    fn coords(&self) -> usize {
        match *self {
            Geometry::Full(d) => d * (d + 1) / 2,
            Geometry::Diagonal(d) => d,
        }
    }

    /// Isometric coordinates: `⟨vec A, vec B⟩ = tr(AB)`.
    fn vec(&self, a: &DMatrix<f64>) -> DVector<f64> {
        let d = self.dim();
        match self {
            Geometry::Diagonal(_) => DVector::from_fn(d, |i, _| a[(i, i)]),
            Geometry::Full(_) => {
                let mut v = Vec::with_capacity(self.coords());
                for i in 0..d {
                    v.push(a[(i, i)]);
                    for j in i + 1..d {
                        v.push(std::f64::consts::SQRT_2 * 0.5 * (a[(i, j)] + a[(j, i)]));
                    }
                }
                DVector::from_vec(v)
            }
        }
    }

    fn mat(&self, v: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        match self {
            Geometry::Diagonal(_) => DMatrix::from_diagonal(&DVector::from_column_slice(&v[..d])),
            Geometry::Full(_) => {
                let mut a = DMatrix::zeros(d, d);
                let mut k = 0;
                for i in 0..d {
                    a[(i, i)] = v[k];
                    k += 1;
                    for j in i + 1..d {
                        a[(i, j)] = v[k] / std::f64::consts::SQRT_2;
                        a[(j, i)] = a[(i, j)];
                        k += 1;
                    }
                }
                a
            }
        }
    }

    /// `e_i` and, for full matrices, `(e_i ± e_j)/√2`.
    fn initial_cuts(&self) -> Vec<DVector<f64>> {
        let d = self.dim();
        let e = |i: usize| {
            let mut v = DVector::zeros(d);
            v[i] = 1.0;
            v
        };
        let mut cuts: Vec<DVector<f64>> = (0..d).map(e).collect();
        if let Geometry::Full(_) = self {
            for i in 0..d {
                for j in i + 1..d {
                    cuts.push((e(i) + e(j)) / std::f64::consts::SQRT_2);
                    cuts.push((e(i) - e(j)) / std::f64::consts::SQRT_2);
                }
            }
        }
        cuts
    }
}

pub(crate) struct MarginProblem {
    pub geometry: Geometry,
    /// `D_i = Π_B − Π_A` for strict `A ≺ B`.
    pub stricts: Vec<DMatrix<f64>>,
    /// `E_j = Π_B − Π_A` for `A ∼ B`.
    pub equivs: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub t: DMatrix<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct MarginSolution {
    pub lambda: Vec<f64>,
    pub c: Vec<f64>,
    pub m: DMatrix<f64>,
    /// `λ_max(m)`, an upper bound on the optimal margin.
    pub upper: f64,
    /// Best density operator whose equivalence residuals are within `tol`.
    pub candidate: Option<Candidate>,
    pub rounds: usize,
    pub pivots: usize,
    pub cuts: usize,
}

pub(crate) struct Settings {
    pub tol: f64,
    /// Stop as soon as the certified upper bound drops to this value.
    pub stop_upper: f64,
    pub max_rounds: usize,
    pub max_pivots: usize,
}

impl MarginProblem {
    fn margin_of(&self, t: &DMatrix<f64>) -> (f64, f64) {
        let margin = self.stricts.iter().map(|d| d.dot(t)).fold(f64::INFINITY, f64::min);
        let residual = self.equivs.iter().map(|e| e.dot(t).abs()).fold(0.0, f64::max);
        (margin, residual)
    }

    fn combine(&self, lambda: &[f64], c: &[f64]) -> DMatrix<f64> {
        let d = self.geometry.dim();
        let mut m = DMatrix::zeros(d, d);
        for (l, di) in lambda.iter().zip(&self.stricts) {
            if *l != 0.0 {
                m += di * *l;
            }
        }
        for (cj, ej) in c.iter().zip(&self.equivs) {
            if *cj != 0.0 {
                m += ej * *cj;
            }
        }
        m
    }

    /// `λ` clipped to the simplex and the resulting `M` with `λ_max(M)`.
    fn dual_point(&self, raw_lambda: &[f64], c: Vec<f64>) -> (Vec<f64>, Vec<f64>, DMatrix<f64>, f64) {
        let mut lambda: Vec<f64> = raw_lambda.iter().map(|l| l.max(0.0)).collect();
        let s: f64 = lambda.iter().sum();
        if s > 0.0 {
            lambda.iter_mut().for_each(|l| *l /= s);
        }
        let m = self.combine(&lambda, &c);
        let upper = linalg::max_eigenvalue(&m);
        (lambda, c, m, upper)
    }

    fn consider(&self, best: &mut Option<Candidate>, t: DMatrix<f64>, tol: f64) {
        let (margin, residual) = self.margin_of(&t);
        if residual > tol || !margin.is_finite() {
            return;
        }
        if best.as_ref().is_none_or(|b| margin > b.margin) {
            *best = Some(Candidate { t, margin });
        }
    }

    fn density_candidates(&self, t: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let d = self.geometry.dim() as f64;
        let t = (t + t.transpose()) * 0.5;
        let lo = linalg::min_eigenvalue(&t);
        let mut out = Vec::new();
        // mixing with I/d keeps equalities between equal-dimension pairs
        let s = d * (-lo).max(0.0) * (1.0 + 1e-9);
        let mut mixed = (&t + DMatrix::identity(t.nrows(), t.nrows()) * (s / d)) / (1.0 + s);
        mixed /= mixed.trace();
        out.push(mixed);
        out.push(linalg::project_spectraplex(&t));
        out
    }

    /// Dykstra's alternating projections between the spectraplex, the
    /// equivalence hyperplanes and the halfspaces `⟨D_i, T⟩ ≥ target`.
    fn dykstra(&self, start: &DMatrix<f64>, target: f64, sweeps: usize) -> DMatrix<f64> {
        let n = 1 + self.equivs.len() + self.stricts.len();
        let mut x = start.clone();
        let mut inc: Vec<DMatrix<f64>> = vec![DMatrix::zeros(x.nrows(), x.ncols()); n];
        for _ in 0..sweeps {
            let before = x.clone();
            for (k, p) in inc.iter_mut().enumerate() {
                let y = &x + &*p;
                let proj = if k == 0 {
                    linalg::project_spectraplex(&y)
                } else if k <= self.equivs.len() {
                    let e = &self.equivs[k - 1];
                    let nn = e.norm_squared();
                    if nn == 0.0 {
                        y.clone()
                    } else {
                        &y - e * (e.dot(&y) / nn)
                    }
                } else {
                    let dm = &self.stricts[k - 1 - self.equivs.len()];
                    let nn = dm.norm_squared();
                    let gap = target - dm.dot(&y);
                    if gap > 0.0 && nn > 0.0 {
                        &y + dm * (gap / nn)
                    } else {
                        y.clone()
                    }
                };
                *p = &y - &proj;
                x = proj;
            }
            if linalg::max_abs(&(&x - before)) < 1e-14 {
                break;
            }
        }
        linalg::project_spectraplex(&x)
    }

    pub fn solve(&self, settings: &Settings) -> Result<MarginSolution> {
        if self.stricts.is_empty() {
            return Err(Error::InvalidInput("at least one strict constraint is required".into()));
        }
        let g = self.geometry;
        let rows = g.coords() + 1;
        let mut b = DVector::zeros(rows);
        b[rows - 1] = 1.0;
        let mut lp = Simplex::new(b);
        let column = |mat: &DMatrix<f64>, sum: f64| {
            let mut v = g.vec(mat).as_slice().to_vec();
            v.push(sum);
            DVector::from_vec(v)
        };
        let d = g.dim();
        let id = DMatrix::<f64>::identity(d, d);
        // free trace multiplier, split by sign
        lp.add_column(-column(&id, 0.0), 1.0);
        lp.add_column(column(&id, 0.0), -1.0);
        let lambda_cols: Vec<usize> = self.stricts.iter().map(|m| lp.add_column(column(m, 1.0), 0.0)).collect();
        let c_cols: Vec<(usize, usize)> = self
            .equivs
            .iter()
            .map(|m| (lp.add_column(column(m, 0.0), 0.0), lp.add_column(-column(m, 0.0), 0.0)))
            .collect();
        let mut cuts = 0;
        for v in g.initial_cuts() {
            lp.add_column(column(&(&v * v.transpose()), 0.0), 0.0);
            cuts += 1;
        }

        let read = |x: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let lambda = lambda_cols.iter().map(|&j| x[j]).collect();
            let c = c_cols.iter().map(|&(p, m)| x[p] - x[m]).collect();
            (lambda, c)
        };

        let mut budget = settings.max_pivots;
        let mut best_dual: Option<Dual> = None;
        let mut best: Option<Candidate> = None;
        let mut last_t: Option<DMatrix<f64>> = None;
        let mut rounds = 0;
        let mut exhausted = false;
        while rounds < settings.max_rounds {
            rounds += 1;
            match lp.solve(&mut budget) {
                Status::Optimal => {}
                Status::Budget => {
                    exhausted = true;
                    break;
                }
                Status::Infeasible => {
                    return Err(Error::Indeterminate { iterations: lp.pivots, lower: f64::NAN, upper: f64::NAN });
                }
                Status::Unbounded { entering, direction } => {
                    // the margin system is infeasible outright: follow the ray
                    // until the bound is clearly negative
                    let base = lp.primal();
                    let mut step = 1.0;
                    for _ in 0..80 {
                        let mut x = base.clone();
                        x[entering] += step;
                        for (r, j) in lp.basis().iter().enumerate() {
                            x[*j] = base[*j] - step * direction[r];
                        }
                        let (l, c) = read(&x);
                        let dual = self.dual_point(&l, c);
                        if dual.3 < -1.0 {
                            best_dual = Some(dual);
                            break;
                        }
                        step *= 2.0;
                    }
                    break;
                }
            }
            let x = lp.primal();
            let (l, c) = read(&x);
            let dual = self.dual_point(&l, c);
            if best_dual.as_ref().is_none_or(|b| dual.3 < b.3) {
                best_dual = Some(dual);
            }
            let upper = best_dual.as_ref().map(|b| b.3).unwrap_or(f64::INFINITY);

            let y = lp.duals();
            let t = -g.mat(&y.as_slice()[..rows - 1]);
            for cand in self.density_candidates(&t) {
                self.consider(&mut best, cand, settings.tol);
            }
            last_t = Some(t.clone());
            if upper <= settings.stop_upper {
                break;
            }
            let lower = best.as_ref().map(|b| b.margin).unwrap_or(f64::NEG_INFINITY);
            if upper - lower <= 1e-9 + 1e-7 * upper.abs() {
                break;
            }
            if let Geometry::Diagonal(_) = g {
                break;
            }
            let (values, vectors) = linalg::sorted_eigen(&t);
            let mut added = false;
            for (k, val) in values.iter().enumerate() {
                if *val < -1e-12 {
                    let v = vectors.column(k).into_owned();
                    lp.add_column(column(&(&v * v.transpose()), 0.0), 0.0);
                    cuts += 1;
                    added = true;
                }
            }
            if !added {
                break;
            }
        }

        let (lambda, c, m, upper) = best_dual.ok_or(Error::Indeterminate {
            iterations: lp.pivots,
            lower: f64::NAN,
            upper: f64::NAN,
        })?;
        let polish_target = best.as_ref().map(|b| b.margin).unwrap_or(0.0).max(0.0);
        let needs_polish = best.as_ref().is_none_or(|b| b.margin < upper - 1e-7 * (1.0 + upper.abs()));
        if needs_polish && upper > settings.stop_upper {
            if let Some(t) = &last_t {
                let target = (0.5 * (polish_target + upper)).max(0.0);
                let polished = self.dykstra(t, target, 2000);
                self.consider(&mut best, polished, settings.tol);
            }
        }
        if exhausted && best.is_none() && upper > settings.stop_upper {
            return Err(Error::Indeterminate { iterations: lp.pivots, lower: f64::NAN, upper });
        }
        Ok(MarginSolution { lambda, c, m, upper, candidate: best, rounds, pivots: lp.pivots, cuts })
    }
}
