//! Unanimity and assignment-feasibility programs over the perturbation `x`.
//!
//! Every program here shares one polyhedron skeleton. Given that
//! `0 <= w_k + x_k <= 1`, the constraint `||w + x||_1 = 1` is the linear
//! equality `sum_k (w_k + x_k) = 1`, so the feasible set is a polyhedron and
//! only the objective is p-dependent: `p = 1` linearizes by split variables
//! `x = x+ - x-`, `p = inf` by a single bound variable `t`, `p = 2` is the
//! minimum-norm QP, and every other exponent goes through the
//! epsilon-approximate p-norm descent.

use crate::error::{Error, Result};
use crate::linprog::{solve_lp, LinearProgramSpec, SolveStatus, FEAS_TOL};
use crate::model::{
    dot, generalized_preference, pnorm, AttackConstraint, Budget, ElectionInstance,
    PreferenceTensor,
};
use crate::pnorm::solve_pnorm_min;
use crate::qp::solve_qp_l2;

/// Margin used for strict preference rows: an assignment to candidate `i`
/// must beat every candidate earlier in the tie order by at least this much,
/// because ties resolve toward the lower index.
pub const DELTA_STRICT: f64 = 1e-7;

/// Default slack accepted on the budget check.
pub const EPS_BUDGET_DEFAULT: f64 = 1e-6;

/// Outcome of a unanimity or assignment program.
#[derive(Debug, Clone, PartialEq)]
pub struct UnanimityResult {
    pub feasible: bool,
    /// Witness perturbation when feasible.
    pub x: Option<Vec<f64>>,
    /// `||x||_p` of the witness under the budget regime (`||x||_1` under the
    /// interval regime, informational).
    pub norm_value: f64,
}

impl UnanimityResult {
    fn infeasible() -> Self {
        Self { feasible: false, x: None, norm_value: f64::NAN }
    }
}

/// Polyhedron over `x` shared by all programs: the simplex-preservation
/// rows plus voter preference rows.
#[derive(Debug, Clone)]
pub struct PerturbationPolyhedron {
    pub spec: LinearProgramSpec,
}

impl PerturbationPolyhedron {
    /// Simplex-preservation skeleton: `sum x_k = 1 - sum w_k` and
    /// `-w_k <= x_k <= 1 - w_k`.
    pub fn new(weights: &[f64]) -> Self {
        let ell = weights.len();
        let mut spec = LinearProgramSpec::new(ell);
        spec.a_eq = vec![vec![1.0; ell]];
        spec.b_eq = vec![1.0 - weights.iter().sum::<f64>()];
        spec.bounds = weights.iter().map(|&w| (-w, 1.0 - w)).collect();
        Self { spec }
    }

    /// Add `<w + x, a> >= margin` as a row over `x`.
    pub fn require_preference(&mut self, a: &[f64], weights: &[f64], margin: f64) {
        self.spec.a_le.push(a.iter().map(|v| -v).collect());
        self.spec.b_le.push(dot(a, weights) - margin);
    }

    /// Intersect with the interval box `w_k + x_k in I_k`.
    pub fn restrict_to_box(&mut self, intervals: &[(f64, f64)], weights: &[f64]) {
        for (bound, (&(lo, hi), &w)) in
            self.spec.bounds.iter_mut().zip(intervals.iter().zip(weights))
        {
            bound.0 = bound.0.max(lo - w);
            bound.1 = bound.1.min(hi - w);
        }
    }
}

/// `minimize ||x||_p` over the polyhedron, dispatching on the exponent.
pub fn min_norm_over(
    poly: &PerturbationPolyhedron,
    p: f64,
    eps: f64,
) -> Result<Option<(Vec<f64>, f64)>> {
    let ell = poly.spec.num_vars();
    if (p - 1.0).abs() < 1e-12 {
        // Split variables z = [x+, x-] with x = x+ - x-.
        let mut spec = LinearProgramSpec::new(2 * ell);
        spec.objective = vec![1.0; 2 * ell];
        spec.bounds = vec![(0.0, 1.0); 2 * ell];
        let expand = |row: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(2 * ell);
            out.extend_from_slice(row);
            out.extend(row.iter().map(|v| -v));
            out
        };
        for row in &poly.spec.a_eq {
            spec.a_eq.push(expand(row));
        }
        spec.b_eq = poly.spec.b_eq.clone();
        for row in &poly.spec.a_le {
            spec.a_le.push(expand(row));
        }
        spec.b_le = poly.spec.b_le.clone();
        for (k, &(lo, hi)) in poly.spec.bounds.iter().enumerate() {
            let mut row = vec![0.0; 2 * ell];
            row[k] = 1.0;
            row[ell + k] = -1.0;
            if hi.is_finite() {
                spec.a_le.push(row.clone());
                spec.b_le.push(hi);
            }
            if lo.is_finite() {
                spec.a_le.push(row.iter().map(|v| -v).collect());
                spec.b_le.push(-lo);
            }
        }
        let sol = solve_lp(&spec)?;
        if sol.status == SolveStatus::Infeasible {
            return Ok(None);
        }
        expect_solved(sol.status)?;
        let x: Vec<f64> = (0..ell).map(|k| sol.z[k] - sol.z[ell + k]).collect();
        let norm = pnorm(&x, 1.0);
        Ok(Some((x, norm)))
    } else if p.is_infinite() {
        // Variables [x, t], minimize t with -t <= x_k <= t.
        let mut spec = LinearProgramSpec::new(ell + 1);
        spec.objective = vec![0.0; ell + 1];
        spec.objective[ell] = 1.0;
        spec.bounds = poly.spec.bounds.clone();
        spec.bounds.push((0.0, f64::INFINITY));
        let expand = |row: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(ell + 1);
            out.extend_from_slice(row);
            out.push(0.0);
            out
        };
        for row in &poly.spec.a_eq {
            spec.a_eq.push(expand(row));
        }
        spec.b_eq = poly.spec.b_eq.clone();
        for row in &poly.spec.a_le {
            spec.a_le.push(expand(row));
        }
        spec.b_le = poly.spec.b_le.clone();
        for k in 0..ell {
            let mut row = vec![0.0; ell + 1];
            row[k] = 1.0;
            row[ell] = -1.0;
            spec.a_le.push(row.clone());
            spec.b_le.push(0.0);
            row[k] = -1.0;
            spec.a_le.push(row);
            spec.b_le.push(0.0);
        }
        let sol = solve_lp(&spec)?;
        if sol.status == SolveStatus::Infeasible {
            return Ok(None);
        }
        expect_solved(sol.status)?;
        let x = sol.z[..ell].to_vec();
        let norm = pnorm(&x, f64::INFINITY);
        Ok(Some((x, norm)))
    } else if (p - 2.0).abs() < 1e-12 {
        let sol = solve_qp_l2(&poly.spec)?;
        if sol.status == SolveStatus::Infeasible {
            return Ok(None);
        }
        expect_solved(sol.status)?;
        let norm = pnorm(&sol.z, 2.0);
        Ok(Some((sol.z, norm)))
    } else {
        let sol = solve_pnorm_min(&poly.spec, p, eps)?;
        if sol.status == SolveStatus::Infeasible {
            return Ok(None);
        }
        // An iteration-capped descent still yields a certified feasible
        // point; it is only potentially further from optimal.
        if sol.max_constraint_violation > FEAS_TOL {
            return Err(Error::NonConvergence(format!(
                "p-norm descent left violation {}",
                sol.max_constraint_violation
            )));
        }
        let norm = pnorm(&sol.z, p);
        Ok(Some((sol.z, norm)))
    }
}

fn expect_solved(status: SolveStatus) -> Result<()> {
    match status {
        SolveStatus::Optimal => Ok(()),
        other => Err(Error::NonConvergence(format!("solver returned {other:?}"))),
    }
}

fn budget_slack(p: f64, eps: f64) -> f64 {
    let special = (p - 1.0).abs() < 1e-12 || (p - 2.0).abs() < 1e-12 || p.is_infinite();
    if special {
        EPS_BUDGET_DEFAULT
    } else {
        eps.max(EPS_BUDGET_DEFAULT)
    }
}

/// Rows forcing every voter of `demographic` to vote for candidate 0.
fn unanimity_polyhedron(
    inst: &ElectionInstance,
    tensor: &PreferenceTensor,
    demographic: &[usize],
) -> Result<PerturbationPolyhedron> {
    let mut poly = PerturbationPolyhedron::new(inst.weights());
    for &j in demographic {
        if j >= inst.num_voters() {
            return Err(Error::IndexOutOfRange(format!("voter {j}")));
        }
        for i in 1..inst.num_candidates() {
            poly.require_preference(tensor.rival(j, i), inst.weights(), 0.0);
        }
    }
    Ok(poly)
}

/// Budget-regime unanimity program: minimal `||x||_p` making all of
/// `demographic` vote for candidate 0, feasible iff that minimum is within
/// the budget (plus `eps` slack for exponents outside {1, 2, inf}).
pub fn unanimity_budget(
    inst: &ElectionInstance,
    tensor: &PreferenceTensor,
    demographic: &[usize],
    p_norm: f64,
    budget: Budget,
    eps: f64,
) -> Result<UnanimityResult> {
    let poly = unanimity_polyhedron(inst, tensor, demographic)?;
    match min_norm_over(&poly, p_norm, eps)? {
        None => Ok(UnanimityResult::infeasible()),
        Some((x, norm)) => {
            let within = match budget {
                Budget::Unbounded => true,
                Budget::Finite(b) => norm <= b + budget_slack(p_norm, eps),
            };
            if within {
                Ok(UnanimityResult { feasible: true, x: Some(x), norm_value: norm })
            } else {
                Ok(UnanimityResult { feasible: false, x: Some(x), norm_value: norm })
            }
        }
    }
}

/// Interval-regime unanimity program: pure LP feasibility with
/// `w_k + x_k in I_k`.
pub fn unanimity_interval(
    inst: &ElectionInstance,
    tensor: &PreferenceTensor,
    demographic: &[usize],
    intervals: &[(f64, f64)],
) -> Result<UnanimityResult> {
    let mut poly = unanimity_polyhedron(inst, tensor, demographic)?;
    poly.restrict_to_box(intervals, inst.weights());
    // Minimize ||x||_1 so witnesses are deterministic and small.
    match min_norm_over(&poly, 1.0, EPS_BUDGET_DEFAULT)? {
        None => Ok(UnanimityResult::infeasible()),
        Some((x, norm)) => Ok(UnanimityResult { feasible: true, x: Some(x), norm_value: norm }),
    }
}

/// Feasibility of a full voter-to-candidate assignment. Each voter `j`
/// assigned to candidate `c` must weakly beat every rival after `c` in the
/// tie order and strictly (by [`DELTA_STRICT`]) beat every rival before it.
pub fn assignment_feasibility(
    inst: &ElectionInstance,
    assignment: &[usize],
    constraint: &AttackConstraint,
    eps: f64,
) -> Result<UnanimityResult> {
    if assignment.len() != inst.num_voters() {
        let missing = assignment.len().min(inst.num_voters());
        return Err(Error::UnassignedVoter(missing));
    }
    let m = inst.num_candidates();
    let mut poly = PerturbationPolyhedron::new(inst.weights());
    for (j, &top) in assignment.iter().enumerate() {
        if top >= m {
            return Err(Error::IndexOutOfRange(format!(
                "voter {j} assigned to candidate {top}"
            )));
        }
        for i in 0..m {
            if i == top {
                continue;
            }
            let a = generalized_preference(inst, j, top, i);
            let margin = if i < top { DELTA_STRICT } else { 0.0 };
            poly.require_preference(&a, inst.weights(), margin);
        }
    }
    match constraint {
        AttackConstraint::NormBudget { p_norm, budget } => {
            match min_norm_over(&poly, *p_norm, eps)? {
                None => Ok(UnanimityResult::infeasible()),
                Some((x, norm)) => {
                    let within = match budget {
                        Budget::Unbounded => true,
                        Budget::Finite(b) => norm <= b + budget_slack(*p_norm, eps),
                    };
                    Ok(UnanimityResult { feasible: within, x: Some(x), norm_value: norm })
                }
            }
        }
        AttackConstraint::IntervalBox { intervals } => {
            poly.restrict_to_box(intervals, inst.weights());
            match min_norm_over(&poly, 1.0, eps)? {
                None => Ok(UnanimityResult::infeasible()),
                Some((x, norm)) => {
                    Ok(UnanimityResult { feasible: true, x: Some(x), norm_value: norm })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preference_tensor;

    fn inst_2x2(
        voters: Vec<Vec<f64>>,
        weights: Vec<f64>,
        p: f64,
    ) -> ElectionInstance {
        ElectionInstance::new(
            vec![vec![1.0, 1.0], vec![0.0, 0.0]],
            voters,
            weights,
            p,
        )
        .unwrap()
    }

    #[test]
    fn empty_demographic_needs_nothing() {
        let inst = inst_2x2(vec![vec![0.0, 0.0]], vec![0.5, 0.5], 1.0);
        let t = preference_tensor(&inst);
        let r = unanimity_budget(&inst, &t, &[], 1.0, Budget::Finite(0.0), 1e-6).unwrap();
        assert!(r.feasible);
        assert!(r.norm_value < 1e-9);
    }

    #[test]
    fn already_satisfied_voter_costs_nothing() {
        let inst = inst_2x2(vec![vec![1.0, 1.0]], vec![0.5, 0.5], 1.0);
        let t = preference_tensor(&inst);
        let r = unanimity_budget(&inst, &t, &[0], 2.0, Budget::Finite(0.0), 1e-6).unwrap();
        assert!(r.feasible);
        assert!(r.norm_value < 1e-8);
    }

    #[test]
    fn minimal_l1_move_matches_hand_value() {
        // w = (1, 0), voter with a = (-1, 1): need w'_2 >= w'_1, minimal
        // ||x||_1 move is to (0.5, 0.5) with norm 1.
        let inst = inst_2x2(vec![vec![0.0, 1.0]], vec![1.0, 0.0], 1.0);
        let t = preference_tensor(&inst);
        assert_eq!(t.rival(0, 1), &[-1.0, 1.0]);
        let r = unanimity_budget(&inst, &t, &[0], 1.0, Budget::Unbounded, 1e-6).unwrap();
        assert!(r.feasible);
        assert!((r.norm_value - 1.0).abs() < 1e-7, "norm {}", r.norm_value);
        let x = r.x.unwrap();
        assert!((x[0] + 0.5).abs() < 1e-7 && (x[1] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn budget_too_small_is_infeasible() {
        let inst = inst_2x2(vec![vec![0.0, 1.0]], vec![1.0, 0.0], 1.0);
        let t = preference_tensor(&inst);
        let r = unanimity_budget(&inst, &t, &[0], 1.0, Budget::Finite(0.5), 1e-6).unwrap();
        assert!(!r.feasible);
        assert!((r.norm_value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn interval_box_pinning() {
        let inst = inst_2x2(vec![vec![1.0, 0.0]], vec![0.5, 0.5], 1.0);
        let t = preference_tensor(&inst);
        // Full box, empty demographic.
        let r = unanimity_interval(&inst, &t, &[], &[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert!(r.feasible);
        // Pin w' to (1, 0): voter agrees with c0 on issue 0 -> satisfied.
        let r = unanimity_interval(&inst, &t, &[0], &[(1.0, 1.0), (0.0, 0.0)]).unwrap();
        assert!(r.feasible);
        let x = r.x.unwrap();
        assert!((inst.weights()[0] + x[0] - 1.0).abs() <= FEAS_TOL);
        // Pin w' to (0, 1): voter prefers c1 there -> infeasible.
        let r = unanimity_interval(&inst, &t, &[0], &[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(!r.feasible);
    }

    #[test]
    fn zero_preference_rows_are_vacuous() {
        // Voter exactly between the candidates on every issue: a == 0,
        // feasible by the 0 >= 0 convention.
        let inst = inst_2x2(vec![vec![0.5, 0.5]], vec![0.5, 0.5], 1.0);
        let t = preference_tensor(&inst);
        assert_eq!(t.rival(0, 1), &[0.0, 0.0]);
        let r = unanimity_budget(&inst, &t, &[0], 2.0, Budget::Finite(0.0), 1e-6).unwrap();
        assert!(r.feasible);
    }

    #[test]
    fn subset_monotonicity_under_interval() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..5);
            let voters: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect())
                .collect();
            let inst = ElectionInstance::new(
                vec![vec![1.0, 1.0, 1.0], vec![0.0, 0.0, 0.0]],
                voters,
                vec![0.2, 0.3, 0.5],
                1.0,
            )
            .unwrap();
            let t = preference_tensor(&inst);
            let box_full = vec![(0.0, 1.0); 3];
            let all: Vec<usize> = (0..n).collect();
            let full = unanimity_interval(&inst, &t, &all, &box_full).unwrap();
            if full.feasible {
                // Every subset must also be feasible (same witness works).
                for mask in 0u32..(1 << n) {
                    let d: Vec<usize> =
                        (0..n).filter(|&j| mask >> j & 1 == 1).collect();
                    let sub = unanimity_interval(&inst, &t, &d, &box_full).unwrap();
                    assert!(sub.feasible, "subset {d:?} infeasible but superset feasible");
                }
            }
        }
    }

    #[test]
    fn assignment_matches_unanimity_for_two_candidates() {
        let inst = inst_2x2(vec![vec![0.0, 1.0]], vec![1.0, 0.0], 1.0);
        let t = preference_tensor(&inst);
        let budget = AttackConstraint::NormBudget { p_norm: 1.0, budget: Budget::Unbounded };
        let via_assignment = assignment_feasibility(&inst, &[0], &budget, 1e-6).unwrap();
        let via_unanimity =
            unanimity_budget(&inst, &t, &[0], 1.0, Budget::Unbounded, 1e-6).unwrap();
        assert_eq!(via_assignment.feasible, via_unanimity.feasible);
        assert!((via_assignment.norm_value - via_unanimity.norm_value).abs() < 1e-7);
    }

    #[test]
    fn assignment_rejects_bad_input() {
        let inst = inst_2x2(vec![vec![0.0, 1.0]], vec![0.5, 0.5], 1.0);
        let budget = AttackConstraint::NormBudget { p_norm: 1.0, budget: Budget::Unbounded };
        assert!(assignment_feasibility(&inst, &[], &budget, 1e-6).is_err());
        assert!(assignment_feasibility(&inst, &[7], &budget, 1e-6).is_err());
    }

    #[test]
    fn current_winners_at_zero_budget() {
        // Both voters already vote their assigned candidates at w.
        let inst = inst_2x2(vec![vec![1.0, 1.0], vec![0.0, 0.0]], vec![0.5, 0.5], 1.0);
        let budget = AttackConstraint::NormBudget { p_norm: 2.0, budget: Budget::Finite(0.0) };
        let r = assignment_feasibility(&inst, &[0, 1], &budget, 1e-6).unwrap();
        assert!(r.feasible);
        assert!(r.norm_value < 1e-8);
    }
}
