//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Solves `maximize cᵀx subject to rows, x ≥ 0`. Rows are normalized to a
//! nonnegative right-hand side; `≤` rows get a slack, `≥` rows a surplus and
//! an artificial, `=` rows an artificial. Phase 1 drives the artificials to
//! zero, phase 2 optimizes the real objective over the feasible basis.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    /// Objective coefficients (maximized); its length is the variable count.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Largest violation of any row or sign constraint at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Entries with magnitude at or below this are treated as zero.
    pub pivot_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pivot_tolerance: 1e-9,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

struct Tableau {
    width: usize,
    /// `rows × width` coefficients, then the right-hand side in the last column.
    cells: Vec<Vec<f64>>,
    /// Reduced costs `z_j - c_j`, objective value in the last column.
    cost: Vec<f64>,
    basis: Vec<usize>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.cells[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.cells[r][c];
        for v in self.cells[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.cells[r].clone();
        for (i, row) in self.cells.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, &pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Installs `objective` (maximized) as the cost row for the current basis.
    fn set_objective(&mut self, objective: &[f64]) {
        self.cost = vec![0.0; self.width + 1];
        for (j, &c) in objective.iter().enumerate() {
            self.cost[j] = -c;
        }
        for r in 0..self.cells.len() {
            let cb = objective.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (v, &a) in self.cost.iter_mut().zip(&self.cells[r]) {
                    *v += cb * a;
                }
            }
        }
    }

    fn optimize(
        &mut self,
        eligible: usize,
        opts: &SimplexOptions,
        iterations: &mut usize,
    ) -> Result<PhaseEnd> {
        let tol = opts.pivot_tolerance;
        loop {
            // Bland: lowest-index improving column.
            let Some(c) = (0..eligible).find(|&j| self.cost[j] < -tol) else {
                return Ok(PhaseEnd::Optimal);
            };
            // Bland: minimum ratio, ties to the lowest basic index.
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.cells.len() {
                let a = self.cells[r][c];
                if a > tol {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < best - tol * best.abs().max(1.0)
                                || (ratio <= best + tol * best.abs().max(1.0)
                                    && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };
            *iterations += 1;
            if *iterations > opts.max_iterations {
                return Err(Error::IterationCap {
                    cap: opts.max_iterations,
                    rows: self.cells.len(),
                    cols: self.width,
                });
            }
            self.pivot(r, c);
        }
    }
}

pub fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpOutcome> {
    let n = lp.num_vars();
    for (k, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(Error::LengthMismatch {
                what: "constraint coefficients",
                expected: n,
                got: c.coeffs.len(),
            });
        }
        if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("constraint {k} has non-finite entries")));
        }
    }

    // Normalize: rhs ≥ 0, and `≥ 0` rows become `≤ 0` so they need no artificial.
    let rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            let flip = c.rhs < 0.0 || (c.rhs == 0.0 && c.relation == Relation::Ge);
            if flip {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), rel, -c.rhs)
            } else {
                (c.coeffs.clone(), c.relation, c.rhs)
            }
        })
        .collect();

    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_artificial = n + slacks;
    let width = first_artificial + artificials;

    let mut cells = Vec::with_capacity(rows.len());
    let mut basis = Vec::with_capacity(rows.len());
    let (mut s, mut a) = (n, first_artificial);
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(width + 1, 0.0);
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[s] = 1.0;
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -1.0;
                s += 1;
                row[a] = 1.0;
                basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                row[a] = 1.0;
                basis.push(a);
                a += 1;
            }
        }
        cells.push(row);
    }

    let mut t = Tableau {
        width,
        cells,
        cost: Vec::new(),
        basis,
    };
    let mut iterations = 0;

    if artificials > 0 {
        let mut phase1 = vec![0.0; width];
        phase1[first_artificial..].iter_mut().for_each(|v| *v = -1.0);
        t.set_objective(&phase1);
        t.optimize(width, opts, &mut iterations)?;
        if t.cost[width] < -opts.pivot_tolerance * (1.0 + t.cells.len() as f64) {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot remaining (zero-valued) artificials out; drop rows that are redundant.
        let mut r = 0;
        while r < t.cells.len() {
            if t.basis[r] >= first_artificial {
                match (0..first_artificial).find(|&j| t.cells[r][j].abs() > opts.pivot_tolerance) {
                    Some(c) => t.pivot(r, c),
                    None => {
                        t.cells.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    t.set_objective(&lp.objective);
    match t.optimize(first_artificial, opts, &mut iterations)? {
        PhaseEnd::Unbounded => Ok(LpOutcome::Unbounded),
        PhaseEnd::Optimal => {
            let mut x = vec![0.0; n];
            for (r, &b) in t.basis.iter().enumerate() {
                if b < n {
                    x[b] = t.rhs(r).max(0.0);
                }
            }
            let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            Ok(LpOutcome::Optimal(LpSolution {
                x,
                objective,
                iterations,
            }))
        }
    }
}
