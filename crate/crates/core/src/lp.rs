//! Exact rational simplex for `{M ω = 1, ω ≥ 0}` feasibility.
//!
//! Phase I with one artificial per row and Bland's rule. The artificial
//! columns are kept, so the reduced costs of the artificials give the duals
//! directly; columns may be appended between solves (column generation).

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

#[derive(Debug, Clone)]
pub struct Phase1 {
    m: usize,
    /// Structural columns as given (for verification).
    cols: Vec<Vec<Q>>,
    rhs_target: Vec<Q>,
    /// Tableau rows over [structural | artificial] plus the right-hand side.
    tab: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    /// Reduced costs over [structural | artificial].
    red: Vec<Q>,
    obj: Q,
    basis: Vec<usize>,
    pub pivots: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase1Result {
    /// Weights on the structural columns.
    Feasible(Vec<Q>),
    /// Dual ray `y` with `yᵀ col ≤ 0` for every column and `Σ y·rhs > 0`.
    Infeasible(Vec<Q>),
    /// Pivot budget exhausted.
    Stalled,
}

impl Phase1 {
    /// Rows are constrained to `rhs` (nonnegative).
    pub fn new(m: usize, rhs: Vec<Q>) -> Phase1 {
        assert_eq!(rhs.len(), m);
        assert!(rhs.iter().all(|r| !r.is_negative()));
        let tab = (0..m)
            .map(|i| {
                let mut row = vec![Q::zero(); m];
                row[i] = Q::one();
                row
            })
            .collect();
        let obj = rhs.iter().fold(Q::zero(), |a, b| a + b);
        Phase1 {
            m,
            cols: vec![],
            rhs_target: rhs.clone(),
            tab,
            rhs,
            red: vec![Q::zero(); m],
            obj,
            basis: (0..m).collect(),
            pivots: 0,
        }
    }

    pub fn ones(m: usize) -> Phase1 {
        Phase1::new(m, vec![Q::one(); m])
    }

    pub fn column_count(&self) -> usize {
        self.cols.len()
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Current duals π_i = 1 − reduced cost of artificial i.
    pub fn duals(&self) -> Vec<Q> {
        let nc = self.ncols();
        (0..self.m).map(|i| Q::one() - &self.red[nc + i]).collect()
    }

    /// Appends a structural column. Indices of artificials shift by one; the
    /// basis is remapped accordingly.
    pub fn add_column(&mut self, col: Vec<Q>) {
        assert_eq!(col.len(), self.m);
        let nc = self.ncols();
        // B⁻¹ sits in the artificial block
        let binv_col: Vec<Q> = (0..self.m)
            .map(|r| (0..self.m).fold(Q::zero(), |acc, i| acc + &self.tab[r][nc + i] * &col[i]))
            .collect();
        let pi = self.duals();
        let d = -(pi.iter().zip(&col).fold(Q::zero(), |a, (p, c)| a + p * c));
        for (r, v) in binv_col.into_iter().enumerate() {
            self.tab[r].insert(nc, v);
        }
        self.red.insert(nc, d);
        for b in &mut self.basis {
            if *b >= nc {
                *b += 1;
            }
        }
        self.cols.push(col);
    }

    fn pivot(&mut self, row: usize, col: usize) {
        self.pivots += 1;
        let p = self.tab[row][col].clone();
        let width = self.tab[row].len();
        for j in 0..width {
            let v = &self.tab[row][j] / &p;
            self.tab[row][j] = v;
        }
        self.rhs[row] = &self.rhs[row] / &p;
        let prow = self.tab[row].clone();
        let prhs = self.rhs[row].clone();
        for r in 0..self.m {
            if r == row {
                continue;
            }
            let f = self.tab[r][col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..width {
                if !prow[j].is_zero() {
                    let v = &self.tab[r][j] - &f * &prow[j];
                    self.tab[r][j] = v;
                }
            }
            self.rhs[r] = &self.rhs[r] - &f * &prhs;
        }
        let f = self.red[col].clone();
        if !f.is_zero() {
            for j in 0..width {
                if !prow[j].is_zero() {
                    let v = &self.red[j] - &f * &prow[j];
                    self.red[j] = v;
                }
            }
            self.obj = &self.obj + &f * &prhs;
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule to optimality (or the pivot cap).
    pub fn solve(&mut self, max_pivots: u64) -> Phase1Result {
        let start = self.pivots;
        loop {
            if self.obj.is_zero() {
                break;
            }
            let Some(enter) = (0..self.red.len()).find(|&j| self.red[j].is_negative()) else { break };
            let mut leave: Option<(usize, Q)> = None;
            for r in 0..self.m {
                let a = &self.tab[r][enter];
                if a.is_positive() {
                    let ratio = &self.rhs[r] / a;
                    let better = match &leave {
                        None => true,
                        Some((lr, lv)) => ratio < *lv || (ratio == *lv && self.basis[r] < self.basis[*lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let (row, _) = leave.expect("phase I objective is bounded below");
            self.pivot(row, enter);
            if self.pivots - start > max_pivots {
                return Phase1Result::Stalled;
            }
        }
        if self.obj.is_zero() {
            let mut x = vec![Q::zero(); self.ncols()];
            for (r, &b) in self.basis.iter().enumerate() {
                if b < self.ncols() {
                    x[b] = self.rhs[r].clone();
                }
            }
            debug_assert!(self.check_primal(&x));
            Phase1Result::Feasible(x)
        } else {
            Phase1Result::Infeasible(self.duals())
        }
    }

    pub fn check_primal(&self, x: &[Q]) -> bool {
        if x.iter().any(|v| v.is_negative()) {
            return false;
        }
        (0..self.m).all(|i| {
            let s = self.cols.iter().zip(x).fold(Q::zero(), |a, (c, w)| a + &c[i] * w);
            s == self.rhs_target[i]
        })
    }
}

/// `yᵀ col ≤ 0` for each column and `yᵀ rhs > 0`.
pub fn is_farkas_certificate(y: &[Q], cols: &[Vec<Q>], rhs: &[Q]) -> bool {
    let dot = |a: &[Q], b: &[Q]| a.iter().zip(b).fold(Q::zero(), |acc, (x, z)| acc + x * z);
    cols.iter().all(|c| !dot(y, c).is_positive()) && dot(y, rhs).is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn colq(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn triangle_matching() {
        let mut lp = Phase1::ones(3);
        for c in [[1, 1, 0], [1, 0, 1], [0, 1, 1]] {
            lp.add_column(colq(&c));
        }
        assert_eq!(lp.solve(1000), Phase1Result::Feasible(vec![q(1, 2), q(1, 2), q(1, 2)]));
    }

    #[test]
    fn star_infeasible() {
        let mut lp = Phase1::ones(4);
        let cols: Vec<Vec<Q>> = [[1, 1, 0, 0], [1, 0, 1, 0], [1, 0, 0, 1]].iter().map(|c| colq(c)).collect();
        for c in &cols {
            lp.add_column(c.clone());
        }
        match lp.solve(1000) {
            Phase1Result::Infeasible(y) => assert!(is_farkas_certificate(&y, &cols, &vec![qi(1); 4])),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn warm_start_after_adding() {
        let mut lp = Phase1::ones(2);
        lp.add_column(colq(&[1, 0]));
        assert!(matches!(lp.solve(100), Phase1Result::Infeasible(_)));
        lp.add_column(colq(&[0, 2]));
        assert_eq!(lp.solve(100), Phase1Result::Feasible(vec![qi(1), q(1, 2)]));
    }
}
