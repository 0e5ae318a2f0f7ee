//! Independent brute-force baselines used to certify solver outputs.
//!
//! These are deliberately dumb: exhaustive scans over exact rational grids,
//! binary weight patterns, and one plain projected-gradient ascent. They
//! share no code path with the solvers they certify beyond the election
//! model itself.

use crate::error::{Error, Result};
use crate::model::{
    deterministic_tally, expected_votes, plurality_outcome, pnorm, preference_tensor,
    AttackConstraint, Budget, ElectionInstance, StochasticModel,
};
use crate::qp::solve_qp_l2_centered;

/// What a weight-space scan scores at each candidate point.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Number of voters choosing candidate 0.
    MaxSupport,
    /// 1.0 when candidate 0 wins the plurality (ties included), else 0.0.
    Majority,
    /// Expected number of votes for candidate 0 under the model.
    ExpectedVotes(StochasticModel),
}

/// Best point found by an exhaustive scan.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub weights: Vec<f64>,
    pub value: f64,
}

/// Hard ceiling on scan sizes; larger enumerations are an input error.
pub const SCAN_CAP: u64 = 1 << 22;

/// Feasibility slack applied when filtering grid points against the
/// attacker constraint.
const CONSTRAINT_TOL: f64 = 1e-9;

pub fn evaluate_objective(
    inst: &ElectionInstance,
    w: &[f64],
    objective: &Objective,
) -> Result<f64> {
    match objective {
        Objective::MaxSupport => Ok(deterministic_tally(inst, w)?.votes[0] as f64),
        Objective::Majority => {
            let tally = deterministic_tally(inst, w)?;
            Ok(if plurality_outcome(&tally) == 0 { 1.0 } else { 0.0 })
        }
        Objective::ExpectedVotes(model) => Ok(expected_votes(inst, w, model)?.value),
    }
}

fn constraint_admits(w_new: &[f64], w_base: &[f64], constraint: &AttackConstraint) -> bool {
    match constraint {
        AttackConstraint::NormBudget { p_norm, budget } => match budget {
            Budget::Unbounded => true,
            Budget::Finite(b) => {
                let x: Vec<f64> = w_new.iter().zip(w_base).map(|(a, b)| a - b).collect();
                pnorm(&x, *p_norm) <= b + CONSTRAINT_TOL
            }
        },
        AttackConstraint::IntervalBox { intervals } => w_new
            .iter()
            .zip(intervals)
            .all(|(&w, &(lo, hi))| w >= lo - CONSTRAINT_TOL && w <= hi + CONSTRAINT_TOL),
    }
}

fn binomial_capped(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut out: u64 = 1;
    for i in 0..k {
        out = out.saturating_mul(n - i) / (i + 1);
        if out > SCAN_CAP {
            return u64::MAX;
        }
    }
    out
}

/// Exhaustive scan of the exact simplex grid `{counts / resolution}` for
/// the best feasible weight vector. Lexicographic scan order; a later point
/// replaces the incumbent only on strict improvement, so the result is
/// deterministic.
pub fn grid_search(
    inst: &ElectionInstance,
    constraint: &AttackConstraint,
    objective: &Objective,
    resolution: u32,
) -> Result<SearchResult> {
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let ell = inst.num_issues();
    let points = binomial_capped(resolution as u64 + ell as u64 - 1, ell as u64 - 1);
    if points > SCAN_CAP {
        return Err(Error::EnumerationCapExceeded(format!(
            "simplex grid has more than {SCAN_CAP} points"
        )));
    }
    let mut best: Option<SearchResult> = None;
    let mut counts = vec![0u32; ell];
    counts[ell - 1] = resolution;
    loop {
        let w: Vec<f64> = counts.iter().map(|&c| c as f64 / resolution as f64).collect();
        if constraint_admits(&w, inst.weights(), constraint) {
            let value = evaluate_objective(inst, &w, objective)?;
            let better = match &best {
                None => true,
                Some(b) => value > b.value,
            };
            if better {
                best = Some(SearchResult { weights: w, value });
            }
        }
        if !next_composition(&mut counts, resolution) {
            break;
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("constraint admits no grid point".into()))
}

/// Advance `counts` (nonnegative, summing to `total`) to the next
/// composition in lexicographic order. Returns false after the last one.
fn next_composition(counts: &mut [u32], total: u32) -> bool {
    let ell = counts.len();
    if ell == 1 {
        return false;
    }
    // Find the rightmost position before the last that can still donate to.
    // Standard "stars and bars" successor: move one unit from the tail pool
    // to the deepest index that can take it.
    let tail = counts[ell - 1];
    if tail > 0 {
        counts[ell - 2] += 1;
        counts[ell - 1] = 0;
        let used: u32 = counts[..ell - 1].iter().sum();
        counts[ell - 1] = total - used;
        return true;
    }
    // Tail empty: carry one unit into the position left of the rightmost
    // nonzero entry and dump the rest back into the tail.
    for k in (0..ell - 1).rev() {
        if counts[k] > 0 {
            if k == 0 {
                return false;
            }
            counts[k] = 0;
            counts[k - 1] += 1;
            let used: u32 = counts[..ell - 1].iter().sum();
            counts[ell - 1] = total - used;
            return true;
        }
    }
    false
}

/// Exhaustive scan of binary weight patterns `w in {0,1}^ell \ {0}`,
/// normalized onto the simplex. On instances where every position is binary
/// the tally is computed with exact integer arithmetic.
pub fn structured_weight_search(
    inst: &ElectionInstance,
    objective: &Objective,
) -> Result<SearchResult> {
    let ell = inst.num_issues();
    if ell > 24 {
        return Err(Error::EnumerationCapExceeded(format!(
            "binary pattern scan needs ell <= 24, got {ell}"
        )));
    }
    let binary = instance_is_binary(inst);
    let mut best: Option<SearchResult> = None;
    for mask in 1u32..(1u32 << ell) {
        let ones = mask.count_ones() as f64;
        let w: Vec<f64> =
            (0..ell).map(|k| if mask >> k & 1 == 1 { 1.0 / ones } else { 0.0 }).collect();
        let value = match objective {
            Objective::MaxSupport | Objective::Majority if binary => {
                let votes0 = binary_votes_for_first(inst, mask);
                match objective {
                    Objective::MaxSupport => votes0 as f64,
                    _ => {
                        if binary_first_wins_plurality(inst, mask) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
            _ => evaluate_objective(inst, &w, objective)?,
        };
        let better = match &best {
            None => true,
            Some(b) => value > b.value,
        };
        if better {
            best = Some(SearchResult { weights: w, value });
        }
    }
    Ok(best.expect("ell >= 1 guarantees at least one pattern"))
}

fn instance_is_binary(inst: &ElectionInstance) -> bool {
    inst.candidates()
        .iter()
        .chain(inst.voters())
        .all(|row| row.iter().all(|&v| v == 0.0 || v == 1.0))
}

/// Integer per-candidate disagreement count over the masked issues; the
/// voter picks the minimizer, lowest index on ties. Exact for binary
/// positions because `|c - v|^p` is 0 or 1.
fn binary_masked_choice(inst: &ElectionInstance, j: usize, mask: u32) -> usize {
    let mut chosen = 0usize;
    let mut best = u32::MAX;
    for (i, cand) in inst.candidates().iter().enumerate() {
        let mut disagreements = 0u32;
        for k in 0..inst.num_issues() {
            if mask >> k & 1 == 1 && cand[k] != inst.voters()[j][k] {
                disagreements += 1;
            }
        }
        if disagreements < best {
            best = disagreements;
            chosen = i;
        }
    }
    chosen
}

fn binary_votes_for_first(inst: &ElectionInstance, mask: u32) -> usize {
    (0..inst.num_voters()).filter(|&j| binary_masked_choice(inst, j, mask) == 0).count()
}

fn binary_first_wins_plurality(inst: &ElectionInstance, mask: u32) -> bool {
    let mut votes = vec![0usize; inst.num_candidates()];
    for j in 0..inst.num_voters() {
        votes[binary_masked_choice(inst, j, mask)] += 1;
    }
    let top = *votes.iter().max().unwrap();
    votes[0] == top
}

/// Plain projected-gradient ascent for the expected-vote objective under a
/// Linear model and a finite norm budget with `p > 1`. Used as the
/// numerical cross-check for the analytic stochastic maximizer.
pub fn projected_gradient_oracle(
    inst: &ElectionInstance,
    model: &StochasticModel,
    p_norm: f64,
    budget: f64,
) -> Result<(Vec<f64>, f64)> {
    let gamma = match model {
        StochasticModel::Linear { gamma, .. } => gamma,
        StochasticModel::Sigmoid { .. } => {
            return Err(Error::InvalidParameter(
                "gradient oracle requires the Linear model".into(),
            ))
        }
    };
    if !(p_norm > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gradient oracle requires p > 1, got {p_norm}"
        )));
    }
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidParameter(format!("bad budget {budget}")));
    }
    let ell = inst.num_issues();
    let tensor = preference_tensor(inst);
    // Affine objective: gradient in x is constant.
    let mut b = vec![0.0; ell];
    for j in 0..inst.num_voters() {
        for i in 1..inst.num_candidates() {
            let a = tensor.rival(j, i);
            for k in 0..ell {
                b[k] += gamma[i - 1] * a[k];
            }
        }
    }
    let bnorm = pnorm(&b, 2.0);
    let mut x = vec![0.0; ell];
    if bnorm > 0.0 && budget > 0.0 {
        let step = 0.5 * budget.max(1e-6) / bnorm;
        let mut iters = 0usize;
        loop {
            let target: Vec<f64> = x.iter().zip(&b).map(|(v, g)| v + step * g).collect();
            let proj = project_feasible(inst, &target, p_norm, budget)?;
            // Relaxed update damps oscillation between the two projection
            // sets; the fixed point is unchanged.
            let next: Vec<f64> =
                x.iter().zip(&proj).map(|(old, new)| 0.5 * old + 0.5 * new).collect();
            let movement = next
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            x = next;
            iters += 1;
            if movement / step <= 1e-8 || iters >= 100_000 {
                break;
            }
        }
        x = project_feasible(inst, &x, p_norm, budget)?;
    }
    let w_new: Vec<f64> = inst.weights().iter().zip(&x).map(|(w, v)| w + v).collect();
    let value = expected_votes(inst, &w_new, model)?.value;
    Ok((x, value))
}

/// Alternating projections onto {sum x = 0, -w <= x <= 1-w} and the p-ball.
/// The affine-box projection is exact (L2 QP); the ball step is radial
/// scaling, which preserves both the zero sum and the box because the box
/// contains the origin.
fn project_feasible(
    inst: &ElectionInstance,
    target: &[f64],
    p_norm: f64,
    budget: f64,
) -> Result<Vec<f64>> {
    use crate::linprog::LinearProgramSpec;
    let ell = inst.num_issues();
    let mut spec = LinearProgramSpec::new(ell);
    spec.a_eq = vec![vec![1.0; ell]];
    spec.b_eq = vec![0.0];
    spec.bounds = inst.weights().iter().map(|&w| (-w, 1.0 - w)).collect();
    let mut y = target.to_vec();
    for _ in 0..60 {
        let proj = solve_qp_l2_centered(&spec, Some(&y))?;
        y = proj.z;
        let norm = pnorm(&y, p_norm);
        if norm <= budget * (1.0 + 1e-12) {
            break;
        }
        let scale = if norm > 0.0 { budget / norm } else { 0.0 };
        for v in &mut y {
            *v *= scale;
        }
    }
    Ok(y)
}
