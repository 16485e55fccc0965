//! Dense two-phase simplex for the small linear programs that appear in the
//! matrix games, supporting-set patterns and counterfactual bounds.
//!
//! Problems are stated as `maximize c·x` subject to linear rows and `x >= 0`.
//! Pivoting falls back to Bland's rule on long degenerate runs, so the method
//! terminates without cycling, and every optimal point is checked against
//! the original rows before it is returned.

use crate::error::{Error, Result};

/// Direction of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }

    /// Primal point of an optimal outcome.
    pub fn point(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    rel: Relation,
    rhs: f64,
}

/// A linear program over nonnegative variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 200_000;
const DEGENERATE_RUN: usize = 50;

impl LinearProgram {
    /// A program with `vars` nonnegative variables and a zero objective.
    pub fn new(vars: usize) -> Self {
        Self {
            vars,
            objective: vec![0.0; vars],
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Sets the objective to maximize.
    pub fn maximize(&mut self, c: Vec<f64>) -> &mut Self {
        assert_eq!(c.len(), self.vars, "objective length");
        self.objective = c;
        self
    }

    /// Sets the objective to minimize.
    pub fn minimize(&mut self, c: Vec<f64>) -> &mut Self {
        self.maximize(c.into_iter().map(|v| -v).collect())
    }

    pub fn add(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.vars, "row length");
        self.rows.push(Row { coeffs, rel, rhs });
        self
    }

    /// Solves the program. On `Optimal`, `value` is the maximum of the stored
    /// objective, so a program built with [`LinearProgram::minimize`] reports
    /// the negated minimum.
    pub fn solve(&self) -> Result<LpOutcome> {
        let outcome = Tableau::build(self).run(&self.objective)?;
        if let LpOutcome::Optimal { x, .. } = &outcome {
            self.check_point(x)?;
        }
        Ok(outcome)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let size: f64 = row.coeffs.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>() + row.rhs.abs();
            let excess = match row.rel {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            if excess > 1e-8 * (1.0 + size) {
                return Err(Error::Solver {
                    message: format!("simplex point violates row {i} by {excess:e}"),
                    gap: excess,
                });
            }
        }
        Ok(())
    }
}

struct Tableau {
    // m rows of width `cols + 1`; the last entry is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    vars: usize,
    cols: usize,
    first_artificial: usize,
    scale: f64,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.vars;
        let slacks = lp.rows.iter().filter(|r| r.rel != Relation::Eq).count();
        let first_artificial = n + slacks;
        // Artificial columns are only needed for rows whose slack cannot start
        // in the basis; allocate one per row to keep indexing simple.
        let cols = first_artificial + m;
        let mut a = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let mut slack = n;
        let mut scale: f64 = 1.0;
        for (i, row) in lp.rows.iter().enumerate() {
            let flip = row.rhs < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            for j in 0..n {
                a[i][j] = sign * row.coeffs[j];
                scale = scale.max(row.coeffs[j].abs());
            }
            a[i][cols] = sign * row.rhs;
            scale = scale.max(row.rhs.abs());
            let rel = match (row.rel, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            match rel {
                Relation::Le => {
                    a[i][slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    a[i][slack] = -1.0;
                    slack += 1;
                    a[i][first_artificial + i] = 1.0;
                    basis[i] = first_artificial + i;
                }
                Relation::Eq => {
                    a[i][first_artificial + i] = 1.0;
                    basis[i] = first_artificial + i;
                }
            }
        }
        Self {
            a,
            basis,
            vars: n,
            cols,
            first_artificial,
            scale,
        }
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let width = self.cols + 1;
        let pv = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= pv;
        }
        let prow = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..width {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for j in 0..width {
                obj[j] -= f * prow[j];
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for maximizing `cost` over the current basis; the last
    /// entry holds minus the objective value.
    fn objective_row(&self, cost: &[f64]) -> Vec<f64> {
        let width = self.cols + 1;
        let mut obj = vec![0.0; width];
        obj[..cost.len()].copy_from_slice(cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = if b < cost.len() { cost[b] } else { 0.0 };
            if cb != 0.0 {
                for j in 0..width {
                    obj[j] -= cb * self.a[i][j];
                }
            }
        }
        obj
    }

    /// Simplex iterations over the allowed columns. Entering columns follow
    /// the largest reduced cost until a run of degenerate pivots, then
    /// Bland's rule, which cannot cycle. Returns `false` when the objective
    /// is unbounded.
    fn iterate(&mut self, obj: &mut [f64], allowed: usize) -> Result<bool> {
        let cost_scale = obj[..allowed].iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let tol = COST_EPS * cost_scale;
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_RUN;
            let entering = if bland {
                (0..allowed).find(|&j| obj[j] > tol)
            } else {
                (0..allowed)
                    .filter(|&j| obj[j] > tol)
                    .max_by(|&i, &j| obj[i].total_cmp(&obj[j]))
            };
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let aic = self.a[i][c];
                if aic <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.a[i][self.cols].max(0.0) / aic;
                best = Some(match best {
                    None => (i, ratio),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        let better_tie = if bland {
                            self.basis[i] < self.basis[bi]
                        } else {
                            aic > self.a[bi][c]
                        };
                        if (ratio < br && !tie) || (tie && better_tie) {
                            (i, ratio)
                        } else {
                            (bi, br)
                        }
                    }
                });
            }
            match best {
                None => return Ok(false),
                Some((r, ratio)) => {
                    degenerate = if ratio <= 1e-12 { degenerate + 1 } else { 0 };
                    self.pivot(r, c, obj);
                }
            }
        }
        Err(Error::Solver {
            message: format!("simplex exceeded {MAX_PIVOTS} pivots"),
            gap: f64::NAN,
        })
    }

    fn run(mut self, cost: &[f64]) -> Result<LpOutcome> {
        // Phase 1: maximize minus the sum of artificials.
        let needs_phase1 = self.basis.iter().any(|&b| b >= self.first_artificial);
        if needs_phase1 {
            let mut phase1 = vec![0.0; self.cols];
            for j in self.first_artificial..self.cols {
                phase1[j] = -1.0;
            }
            let mut obj = self.objective_row(&phase1);
            self.iterate(&mut obj, self.first_artificial)?;
            let infeasibility = obj[self.cols];
            if infeasibility > 1e-9 * self.scale {
                return Ok(LpOutcome::Infeasible);
            }
            // Drive remaining artificials out of the basis.
            let mut i = 0;
            while i < self.a.len() {
                if self.basis[i] >= self.first_artificial {
                    let entering = (0..self.first_artificial)
                        .filter(|&j| self.a[i][j].abs() > 1e-9)
                        .max_by(|&j, &k| self.a[i][j].abs().total_cmp(&self.a[i][k].abs()));
                    match entering {
                        Some(j) => {
                            let mut dummy = vec![0.0; self.cols + 1];
                            self.pivot(i, j, &mut dummy);
                            i += 1;
                        }
                        None => {
                            // Redundant row.
                            self.a.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
            for row in self.a.iter_mut() {
                for v in row[self.first_artificial..self.cols].iter_mut() {
                    *v = 0.0;
                }
            }
        }
        let mut obj = self.objective_row(cost);
        if !self.iterate(&mut obj, self.first_artificial)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; self.vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.vars {
                x[b] = self.a[i][self.cols].max(0.0);
            }
        }
        let value = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpOutcome::Optimal { x, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![3.0, 5.0])
            .add(vec![1.0, 0.0], Relation::Le, 4.0)
            .add(vec![0.0, 2.0], Relation::Le, 12.0)
            .add(vec![3.0, 2.0], Relation::Le, 18.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 36.0).abs() < 1e-9);
                assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn minimization_with_ge_rows() {
        // min x + y, x + 2y >= 4, 3x + y >= 6 -> (1.6, 1.2), 2.8.
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![1.0, 1.0])
            .add(vec![1.0, 2.0], Relation::Ge, 4.0)
            .add(vec![3.0, 1.0], Relation::Ge, 6.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert!((value + 2.8).abs() < 1e-9);
                assert!((x[0] - 1.6).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add(vec![1.0], Relation::Ge, 2.0)
            .add(vec![1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 0.0]).add(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_rows_and_negative_rhs() {
        // x + y = 1, x - y <= -0.5 (flipped internally), max x -> x = 0.25.
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 0.0])
            .add(vec![1.0, 1.0], Relation::Eq, 1.0)
            .add(vec![1.0, -1.0], Relation::Le, -0.5);
        let x = lp.solve().unwrap();
        assert!((x.point().unwrap()[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 1.0])
            .add(vec![1.0, 1.0], Relation::Eq, 1.0)
            .add(vec![2.0, 2.0], Relation::Eq, 2.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
