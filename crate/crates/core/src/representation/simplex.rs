//! Dense revised simplex for `min cᵀx, Ax = b, x ≥ 0` with `b ≥ 0` and few
//! rows. Columns can be appended between solves; the current basis stays
//! feasible, so later solves warm-start.

use nalgebra::{DMatrix, DVector};

const PIVOT_EPS: f64 = 1e-10;
const COST_EPS: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Status {
    Optimal,
    /// Column `entering` can grow without bound; basic variables move by
    /// `−t · direction`.
    Unbounded { entering: usize, direction: DVector<f64> },
    Infeasible,
    Budget,
}

pub(crate) struct Simplex {
    m: usize,
    b: DVector<f64>,
    cols: Vec<DVector<f64>>,
    cost: Vec<f64>,
    artificial: Vec<bool>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: DMatrix<f64>,
    xb: DVector<f64>,
    phase_one_done: bool,
    since_refactor: usize,
    pub pivots: usize,
}

impl Simplex {
    pub fn new(b: DVector<f64>) -> Self {
        let m = b.len();
        debug_assert!(b.iter().all(|x| *x >= 0.0));
        let mut s = Simplex {
            m,
            b: b.clone(),
            cols: Vec::new(),
            cost: Vec::new(),
            artificial: Vec::new(),
            basis: Vec::with_capacity(m),
            is_basic: Vec::new(),
            binv: DMatrix::identity(m, m),
            xb: b,
            phase_one_done: false,
            since_refactor: 0,
            pivots: 0,
        };
        for r in 0..m {
            let mut e = DVector::zeros(m);
            e[r] = 1.0;
            let j = s.push(e, 0.0, true);
            s.basis.push(j);
            s.is_basic[j] = true;
        }
        s
    }

    fn push(&mut self, col: DVector<f64>, cost: f64, artificial: bool) -> usize {
        self.cols.push(col);
        self.cost.push(cost);
        self.artificial.push(artificial);
        self.is_basic.push(false);
        self.cols.len() - 1
    }

    pub fn add_column(&mut self, col: DVector<f64>, cost: f64) -> usize {
        debug_assert_eq!(col.len(), self.m);
        self.push(col, cost, false)
    }

    fn phase_cost(&self, j: usize, phase_one: bool) -> f64 {
        match (phase_one, self.artificial[j]) {
            (true, true) => 1.0,
            (true, false) => 0.0,
            (false, true) => 0.0,
            (false, false) => self.cost[j],
        }
    }

    fn duals_for(&self, phase_one: bool) -> DVector<f64> {
        let cb = DVector::from_iterator(self.m, self.basis.iter().map(|&j| self.phase_cost(j, phase_one)));
        self.binv.transpose() * cb
    }

    /// Simplex multipliers `y` with `B^T y = c_B` for the phase-two costs.
    pub fn duals(&self) -> DVector<f64> {
        self.duals_for(false)
    }

    #[cfg(test)]
    pub fn objective(&self) -> f64 {
        self.basis.iter().zip(self.xb.iter()).map(|(&j, x)| self.phase_cost(j, false) * x).sum()
    }

    /// Full primal vector over all (non-artificial and artificial) columns.
    pub fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cols.len()];
        for (r, &j) in self.basis.iter().enumerate() {
            x[j] = self.xb[r];
        }
        x
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    fn refactor(&mut self) {
        let bmat = DMatrix::from_columns(&self.basis.iter().map(|&j| self.cols[j].clone()).collect::<Vec<_>>());
        if let Some(inv) = bmat.try_inverse() {
            self.binv = inv;
            self.xb = &self.binv * &self.b;
            for x in self.xb.iter_mut() {
                if *x < 0.0 && *x > -1e-12 {
                    *x = 0.0;
                }
            }
        }
        self.since_refactor = 0;
    }

    fn pivot(&mut self, row: usize, entering: usize, d: &DVector<f64>) {
        let theta = self.xb[row] / d[row];
        for i in 0..self.m {
            if i != row {
                self.xb[i] -= theta * d[i];
                if self.xb[i] < 0.0 && self.xb[i] > -1e-12 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[row] = theta;
        let pr = d[row];
        let pivot_row = self.binv.row(row) / pr;
        for i in 0..self.m {
            if i != row && d[i] != 0.0 {
                let upd = &pivot_row * d[i];
                let mut r = self.binv.row_mut(i);
                r -= upd;
            }
        }
        self.binv.set_row(row, &pivot_row);
        let leaving = self.basis[row];
        self.is_basic[leaving] = false;
        self.is_basic[entering] = true;
        self.basis[row] = entering;
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    fn iterate(&mut self, phase_one: bool, budget: &mut usize) -> Status {
        let mut degenerate_run = 0usize;
        loop {
            if *budget == 0 {
                return Status::Budget;
            }
            let y = self.duals_for(phase_one);
            let bland = degenerate_run > 5 * self.m;
            let mut entering = None;
            let mut best = -COST_EPS;
            for j in 0..self.cols.len() {
                if self.is_basic[j] || (!phase_one && self.artificial[j]) {
                    continue;
                }
                let scale = 1.0 + self.cols[j].amax();
                let rc = (self.phase_cost(j, phase_one) - y.dot(&self.cols[j])) / scale;
                if rc < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(q) = entering else { return Status::Optimal };
            let d = &self.binv * &self.cols[q];
            let mut row = None;
            let mut ratio = f64::INFINITY;
            for i in 0..self.m {
                if d[i] > PIVOT_EPS {
                    let r = self.xb[i].max(0.0) / d[i];
                    let better = match row {
                        None => true,
                        Some(k) => r < ratio - 1e-14 || (r <= ratio + 1e-14 && self.basis[i] < self.basis[k]),
                    };
                    if better {
                        ratio = r;
                        row = Some(i);
                    }
                }
            }
            let Some(r) = row else {
                return Status::Unbounded { entering: q, direction: d };
            };
            degenerate_run = if ratio <= 1e-14 { degenerate_run + 1 } else { 0 };
            self.pivot(r, q, &d);
            *budget -= 1;
        }
    }

    fn drive_out_artificials(&mut self) {
        for row in 0..self.m {
            let j = self.basis[row];
            if !self.artificial[j] {
                continue;
            }
            let brow = self.binv.row(row).clone_owned();
            let candidate = (0..self.cols.len())
                .filter(|&k| !self.is_basic[k] && !self.artificial[k])
                .map(|k| (k, (&brow * &self.cols[k])[0]))
                .find(|(_, v)| v.abs() > 1e-9);
            if let Some((k, _)) = candidate {
                let d = &self.binv * &self.cols[k];
                self.pivot(row, k, &d);
            }
        }
    }

    /// Runs phase one on first call, then phase two.
    pub fn solve(&mut self, budget: &mut usize) -> Status {
        if !self.phase_one_done {
            match self.iterate(true, budget) {
                Status::Optimal => {}
                Status::Budget => return Status::Budget,
                // phase one is bounded below by zero
                Status::Unbounded { .. } | Status::Infeasible => return Status::Infeasible,
            }
            let infeas: f64 = self
                .basis
                .iter()
                .zip(self.xb.iter())
                .filter(|(j, _)| self.artificial[**j])
                .map(|(_, x)| x.abs())
                .sum();
            if infeas > 1e-9 {
                return Status::Infeasible;
            }
            self.drive_out_artificials();
            self.phase_one_done = true;
        }
        self.iterate(false, budget)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min −x1 − 2x2 s.t. x1 + x2 + s1 = 4, x1 + 3x2 + s2 = 6
        let mut lp = Simplex::new(DVector::from_vec(vec![4.0, 6.0]));
        lp.add_column(DVector::from_vec(vec![1.0, 1.0]), -1.0);
        lp.add_column(DVector::from_vec(vec![1.0, 3.0]), -2.0);
        lp.add_column(DVector::from_vec(vec![1.0, 0.0]), 0.0);
        lp.add_column(DVector::from_vec(vec![0.0, 1.0]), 0.0);
        let mut budget = 100;
        assert_eq!(lp.solve(&mut budget), Status::Optimal);
        // optimum at x1 = 3, x2 = 1
        assert!((lp.objective() + 5.0).abs() < 1e-12);
        let x = lp.primal();
        assert!((x[2] - 3.0).abs() < 1e-12 && (x[3] - 1.0).abs() < 1e-12);
        // duals satisfy complementary slackness on basic columns
        let y = lp.duals();
        assert!((y.dot(&DVector::from_vec(vec![1.0, 1.0])) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = Simplex::new(DVector::from_vec(vec![1.0]));
        lp.add_column(DVector::from_vec(vec![-1.0]), 0.0);
        let mut budget = 100;
        assert_eq!(lp.solve(&mut budget), Status::Infeasible);

        // min −x1 s.t. x1 − x2 = 1
        let mut lp = Simplex::new(DVector::from_vec(vec![1.0]));
        lp.add_column(DVector::from_vec(vec![1.0]), -1.0);
        lp.add_column(DVector::from_vec(vec![-1.0]), 0.0);
        let mut budget = 100;
        assert!(matches!(lp.solve(&mut budget), Status::Unbounded { .. }));
    }
}
