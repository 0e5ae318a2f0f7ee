//! Dense two-phase simplex for desk-scale linear programs.
//!
//! Deterministic by construction: Bland's rule picks the lowest-index
//! entering column and breaks leaving-row ties by lowest basic-variable
//! index, so identical inputs always produce identical pivots (and Bland's
//! rule also rules out cycling).

use crate::error::{Error, Result};

/// Feasibility tolerance: an `Optimal` solution violates no constraint by
/// more than this.
pub const FEAS_TOL: f64 = 1e-8;

const PIVOT_TOL: f64 = 1e-9;
const REDUCED_COST_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;

/// minimize `objective . z` subject to `a_eq z = b_eq`, `a_le z <= b_le`,
/// and per-variable bounds (either side may be infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgramSpec {
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_le: Vec<Vec<f64>>,
    pub b_le: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgramSpec {
    /// Spec with free variables and no constraints.
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            a_eq: vec![],
            b_eq: vec![],
            a_le: vec![],
            b_le: vec![],
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::Dimension(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        if self.a_eq.len() != self.b_eq.len() || self.a_le.len() != self.b_le.len() {
            return Err(Error::Dimension("constraint matrix/rhs length mismatch".into()));
        }
        for row in self.a_eq.iter().chain(&self.a_le) {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "constraint row has {} coefficients for {n} variables",
                    row.len()
                )));
            }
        }
        for (k, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo > hi {
                return Err(Error::Dimension(format!("bound {k}: lo {lo} > hi {hi}")));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `z`.
    pub fn violation(&self, z: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for (row, &b) in self.a_eq.iter().zip(&self.b_eq) {
            v = v.max((dot(row, z) - b).abs());
        }
        for (row, &b) in self.a_le.iter().zip(&self.b_le) {
            v = v.max(dot(row, z) - b);
        }
        for (&zk, &(lo, hi)) in z.iter().zip(&self.bounds) {
            v = v.max(lo - zk).max(zk - hi);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The iteration cap was hit before optimality was proven. The returned
    /// point is the best feasible iterate, never a silently wrong answer.
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramSolution {
    pub status: SolveStatus,
    pub z: Vec<f64>,
    pub objective_value: f64,
    pub max_constraint_violation: f64,
}

impl ProgramSolution {
    pub fn infeasible(n: usize) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            z: vec![0.0; n],
            objective_value: f64::NAN,
            max_constraint_violation: f64::NAN,
        }
    }
}

/// How each original variable maps onto the nonnegative standard-form
/// variables.
enum VarMap {
    /// z = offset + u_a
    Shifted { col: usize, offset: f64 },
    /// z = offset - u_a
    Negated { col: usize, offset: f64 },
    /// z = u_plus - u_minus
    Split { plus: usize, minus: usize },
}

pub fn solve_lp(spec: &LinearProgramSpec) -> Result<ProgramSolution> {
    spec.validate()?;
    let n = spec.num_vars();

    // Rewrite every variable as nonnegative standard-form variables.
    let mut maps = Vec::with_capacity(n);
    let mut num_std = 0usize;
    let mut extra_le: Vec<(usize, f64)> = Vec::new(); // u_col <= ub
    for &(lo, hi) in &spec.bounds {
        if lo.is_finite() {
            let col = num_std;
            num_std += 1;
            if hi.is_finite() {
                extra_le.push((col, hi - lo));
            }
            maps.push(VarMap::Shifted { col, offset: lo });
        } else if hi.is_finite() {
            let col = num_std;
            num_std += 1;
            maps.push(VarMap::Negated { col, offset: hi });
        } else {
            let plus = num_std;
            let minus = num_std + 1;
            num_std += 2;
            maps.push(VarMap::Split { plus, minus });
        }
    }

    let to_std_row = |row: &[f64], b: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; num_std];
        let mut rhs = b;
        for (v, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[v] {
                VarMap::Shifted { col, offset } => {
                    out[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Negated { col, offset } => {
                    out[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { plus, minus } => {
                    out[plus] += a;
                    out[minus] -= a;
                }
            }
        }
        (out, rhs)
    };

    // Assemble equality rows: original equalities, then le rows with slacks,
    // then the bound rows introduced by the transformation.
    let num_le = spec.a_le.len() + extra_le.len();
    let num_rows = spec.a_eq.len() + num_le;
    let num_cols = num_std + num_le + num_rows; // structural + slack + artificial
    let art_start = num_std + num_le;

    let mut tab = vec![vec![0.0; num_cols + 1]; num_rows];
    let mut row_idx = 0usize;
    for (row, &b) in spec.a_eq.iter().zip(&spec.b_eq) {
        let (std_row, rhs) = to_std_row(row, b);
        tab[row_idx][..num_std].copy_from_slice(&std_row);
        tab[row_idx][num_cols] = rhs;
        row_idx += 1;
    }
    let mut slack = num_std;
    for (row, &b) in spec.a_le.iter().zip(&spec.b_le) {
        let (std_row, rhs) = to_std_row(row, b);
        tab[row_idx][..num_std].copy_from_slice(&std_row);
        tab[row_idx][slack] = 1.0;
        tab[row_idx][num_cols] = rhs;
        slack += 1;
        row_idx += 1;
    }
    for &(col, ub) in &extra_le {
        tab[row_idx][col] = 1.0;
        tab[row_idx][slack] = 1.0;
        tab[row_idx][num_cols] = ub;
        slack += 1;
        row_idx += 1;
    }

    // Make every rhs nonnegative, then install one artificial per row.
    let mut basis = Vec::with_capacity(num_rows);
    for (i, row) in tab.iter_mut().enumerate() {
        if row[num_cols] < 0.0 {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
        row[art_start + i] = 1.0;
        basis.push(art_start + i);
    }

    // Objective over standard-form variables. The constant shift from the
    // bound offsets drops out because the final objective is re-evaluated on
    // the recovered original variables.
    let mut cost = vec![0.0; num_cols];
    for (v, &c) in spec.objective.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        match maps[v] {
            VarMap::Shifted { col, .. } => cost[col] += c,
            VarMap::Negated { col, .. } => cost[col] -= c,
            VarMap::Split { plus, minus } => {
                cost[plus] += c;
                cost[minus] -= c;
            }
        }
    }

    let max_iter = 10_000 + 50 * (num_rows + num_cols);

    // Phase 1: drive the artificials to zero.
    let mut phase1_cost = vec![0.0; num_cols];
    for c in phase1_cost.iter_mut().skip(art_start) {
        *c = 1.0;
    }
    let mut tab = Tableau { rows: tab, basis, num_cols };
    match tab.run(&phase1_cost, art_start, max_iter) {
        PivotOutcome::Optimal => {}
        PivotOutcome::Unbounded => unreachable!("phase 1 objective is bounded below"),
        PivotOutcome::IterationLimit => {
            return Ok(ProgramSolution {
                status: SolveStatus::IterationLimit,
                z: vec![0.0; n],
                objective_value: f64::NAN,
                max_constraint_violation: f64::NAN,
            });
        }
    }
    if tab.objective(&phase1_cost) > PHASE1_TOL {
        return Ok(ProgramSolution::infeasible(n));
    }

    // Pivot leftover artificials out of the basis; rows that cannot pivot
    // are redundant and get dropped.
    let mut drop_rows = Vec::new();
    for i in 0..tab.rows.len() {
        if tab.basis[i] >= art_start {
            let col = (0..art_start).find(|&j| tab.rows[i][j].abs() > PHASE1_TOL);
            match col {
                Some(j) => tab.pivot(i, j),
                None => drop_rows.push(i),
            }
        }
    }
    for &i in drop_rows.iter().rev() {
        tab.rows.remove(i);
        tab.basis.remove(i);
    }

    // Phase 2 on the original objective; artificial columns may not re-enter.
    let status = match tab.run(&cost, art_start, max_iter) {
        PivotOutcome::Optimal => SolveStatus::Optimal,
        PivotOutcome::Unbounded => SolveStatus::Unbounded,
        PivotOutcome::IterationLimit => SolveStatus::IterationLimit,
    };

    if status == SolveStatus::Unbounded {
        return Ok(ProgramSolution {
            status,
            z: vec![0.0; n],
            objective_value: f64::NEG_INFINITY,
            max_constraint_violation: f64::NAN,
        });
    }

    // Recover the original variables.
    let mut u = vec![0.0; num_cols];
    for (i, &b) in tab.basis.iter().enumerate() {
        u[b] = tab.rows[i][tab.num_cols];
    }
    let z: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shifted { col, offset } => offset + u[col],
            VarMap::Negated { col, offset } => offset - u[col],
            VarMap::Split { plus, minus } => u[plus] - u[minus],
        })
        .collect();
    let objective_value = dot(&spec.objective, &z);
    let max_constraint_violation = spec.violation(&z);
    Ok(ProgramSolution { status, z, objective_value, max_constraint_violation })
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    num_cols: usize,
}

enum PivotOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, &b)| cost[b] * self.rows[i][self.num_cols])
            .sum()
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut r = cost[j];
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b] != 0.0 {
                r -= cost[b] * self.rows[i][j];
            }
        }
        r
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        for x in self.rows[row].iter_mut() {
            *x /= piv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (x, &p) in r.iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland-rule simplex iterations; columns at `banned_from` and beyond
    /// never enter the basis.
    fn run(&mut self, cost: &[f64], banned_from: usize, max_iter: usize) -> PivotOutcome {
        for _ in 0..max_iter {
            let entering = (0..banned_from)
                .find(|&j| self.reduced_cost(cost, j) < -REDUCED_COST_TOL);
            let Some(j) = entering else {
                return PivotOutcome::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][j];
                if a > PIVOT_TOL {
                    let ratio = self.rows[i][self.num_cols] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - PIVOT_TOL
                                || (ratio < lr + PIVOT_TOL && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((i, _)) => self.pivot(i, j),
                None => return PivotOutcome::Unbounded,
            }
        }
        PivotOutcome::IterationLimit
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimize_with_lower_bound() {
        // minimize z1 s.t. z1 >= 3
        let mut spec = LinearProgramSpec::new(1);
        spec.objective = vec![1.0];
        spec.bounds = vec![(3.0, f64::INFINITY)];
        let sol = solve_lp(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.z[0] - 3.0).abs() < FEAS_TOL);
        assert!((sol.objective_value - 3.0).abs() < FEAS_TOL);
    }

    #[test]
    fn detects_infeasible() {
        // z1 <= -1 and z1 >= 0
        let mut spec = LinearProgramSpec::new(1);
        spec.a_le = vec![vec![1.0]];
        spec.b_le = vec![-1.0];
        spec.bounds = vec![(0.0, f64::INFINITY)];
        let sol = solve_lp(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // minimize -z1, z1 free
        let mut spec = LinearProgramSpec::new(1);
        spec.objective = vec![-1.0];
        let sol = solve_lp(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn equality_and_inequality_mix() {
        // minimize -x - 2y s.t. x + y = 1, x - y <= 0.5, x, y >= 0
        let mut spec = LinearProgramSpec::new(2);
        spec.objective = vec![-1.0, -2.0];
        spec.a_eq = vec![vec![1.0, 1.0]];
        spec.b_eq = vec![1.0];
        spec.a_le = vec![vec![1.0, -1.0]];
        spec.b_le = vec![0.5];
        spec.bounds = vec![(0.0, f64::INFINITY); 2];
        let sol = solve_lp(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        // Optimum puts all weight on y.
        assert!((sol.z[1] - 1.0).abs() < 1e-8);
        assert!((sol.objective_value + 2.0).abs() < 1e-8);
        assert!(sol.max_constraint_violation <= FEAS_TOL);
    }

    #[test]
    fn upper_bounded_free_variable() {
        // minimize -z s.t. z <= 4 (upper bound only)
        let mut spec = LinearProgramSpec::new(1);
        spec.objective = vec![-1.0];
        spec.bounds = vec![(f64::NEG_INFINITY, 4.0)];
        let sol = solve_lp(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.z[0] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn negative_rhs_rows() {
        // minimize x + y s.t. -x - y <= -2, x, y in [0, 5]
        let mut spec = LinearProgramSpec::new(2);
        spec.objective = vec![1.0, 1.0];
        spec.a_le = vec![vec![-1.0, -1.0]];
        spec.b_le = vec![-2.0];
        spec.bounds = vec![(0.0, 5.0); 2];
        let sol = solve_lp(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 stated twice.
        let mut spec = LinearProgramSpec::new(2);
        spec.objective = vec![1.0, 0.0];
        spec.a_eq = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        spec.b_eq = vec![1.0, 1.0];
        spec.bounds = vec![(0.0, f64::INFINITY); 2];
        let sol = solve_lp(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 0.0).abs() < 1e-8);
        assert!(sol.max_constraint_violation <= FEAS_TOL);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let mut spec = LinearProgramSpec::new(2);
        spec.a_eq = vec![vec![1.0]];
        spec.b_eq = vec![1.0];
        assert!(solve_lp(&spec).is_err());
    }
}
