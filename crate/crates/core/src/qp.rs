//! Minimum-Euclidean-norm point of a polyhedron, by a primal active-set
//! method.
//!
//! The problem is `minimize ||z||_2` subject to the linear constraints of a
//! [`LinearProgramSpec`] (its objective field is ignored). Strict convexity
//! of the objective makes the active-set iteration straightforward: each
//! equality-constrained subproblem `min ||z||^2 s.t. A z = b` has the closed
//! form `z = A^T (A A^T)^+ b`.

use crate::error::Result;
use crate::linprog::{solve_lp, LinearProgramSpec, ProgramSolution, SolveStatus};

/// KKT residual bound for points reported `Optimal`.
pub const KKT_TOL: f64 = 1e-6;

const ACTIVE_TOL: f64 = 1e-9;
const MULTIPLIER_TOL: f64 = 1e-9;

/// Solve `minimize ||z - center||_2` over the constraint set of `spec`.
/// `center = None` minimizes the plain norm; a center turns the solve into a
/// Euclidean projection, which the p-norm solver uses as its projection
/// backend.
pub fn solve_qp_l2_centered(
    spec: &LinearProgramSpec,
    center: Option<&[f64]>,
) -> Result<ProgramSolution> {
    spec.validate()?;
    let n = spec.num_vars();
    let y = center.map(|c| c.to_vec()).unwrap_or_else(|| vec![0.0; n]);

    // All constraints in <= form over z: eq rows kept separate.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let num_eq = spec.a_eq.len();
    for (row, &b) in spec.a_eq.iter().zip(&spec.b_eq) {
        rows.push(row.clone());
        rhs.push(b);
    }
    for (row, &b) in spec.a_le.iter().zip(&spec.b_le) {
        rows.push(row.clone());
        rhs.push(b);
    }
    for (k, &(lo, hi)) in spec.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut r = vec![0.0; n];
            r[k] = 1.0;
            rows.push(r);
            rhs.push(hi);
        }
        if lo.is_finite() {
            let mut r = vec![0.0; n];
            r[k] = -1.0;
            rows.push(r);
            rhs.push(-lo);
        }
    }

    // Feasible start from a zero-objective LP over the same constraints.
    let mut feas_spec = spec.clone();
    feas_spec.objective = vec![0.0; n];
    let feas = solve_lp(&feas_spec)?;
    if feas.status == SolveStatus::Infeasible {
        return Ok(ProgramSolution::infeasible(n));
    }
    let mut z = feas.z;

    let mut active: Vec<usize> = (0..rows.len())
        .filter(|&i| i < num_eq || (dot(&rows[i], &z) - rhs[i]).abs() <= ACTIVE_TOL)
        .collect();

    let max_iter = 100 * (n + rows.len() + 1);
    let mut status = SolveStatus::IterationLimit;
    for _ in 0..max_iter {
        // Equality-constrained minimizer over the current working set,
        // relative to the center: u = z - y, A u = b - A y.
        let a_act: Vec<&[f64]> = active.iter().map(|&i| rows[i].as_slice()).collect();
        let b_act: Vec<f64> = active.iter().map(|&i| rhs[i] - dot(&rows[i], &y)).collect();
        let (u_star, lambda) = min_norm_equality(&a_act, &b_act, n);
        let z_star: Vec<f64> = u_star.iter().zip(&y).map(|(u, c)| u + c).collect();

        let step: Vec<f64> = z_star.iter().zip(&z).map(|(s, c)| s - c).collect();
        if step.iter().map(|d| d * d).sum::<f64>().sqrt() <= ACTIVE_TOL {
            // At the working-set minimizer: check multiplier signs. With
            // z - y = sum lambda_i a_i, an active inequality needs
            // lambda_i <= 0 to be KKT-consistent (its multiplier is
            // -lambda_i >= 0).
            let mut worst: Option<(usize, f64)> = None;
            for (pos, &ci) in active.iter().enumerate() {
                if ci < num_eq {
                    continue;
                }
                let l = lambda[pos];
                if l > MULTIPLIER_TOL {
                    let better = match worst {
                        None => true,
                        Some((_, wl)) => l > wl,
                    };
                    if better {
                        worst = Some((pos, l));
                    }
                }
            }
            match worst {
                Some((pos, _)) => {
                    active.remove(pos);
                }
                None => {
                    status = SolveStatus::Optimal;
                    break;
                }
            }
        } else {
            // Longest feasible step toward z_star; a blocking constraint
            // joins the working set.
            let mut alpha = 1.0_f64;
            let mut blocker: Option<usize> = None;
            for i in num_eq..rows.len() {
                if active.contains(&i) {
                    continue;
                }
                let ad = dot(&rows[i], &step);
                if ad > ACTIVE_TOL {
                    let gap = rhs[i] - dot(&rows[i], &z);
                    let a = gap / ad;
                    if a < alpha - 1e-15 {
                        alpha = a.max(0.0);
                        blocker = Some(i);
                    }
                }
            }
            for (zk, dk) in z.iter_mut().zip(&step) {
                *zk += alpha * dk;
            }
            if let Some(i) = blocker {
                active.push(i);
                active.sort_unstable();
            }
        }
    }

    let objective_value = z
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let max_constraint_violation = spec.violation(&z);
    Ok(ProgramSolution { status, z, objective_value, max_constraint_violation })
}

/// Minimum-norm feasible point: `minimize ||z||_2` over the constraints of
/// `spec`. `objective_value` of an `Optimal` result is the attained norm.
pub fn solve_qp_l2(spec: &LinearProgramSpec) -> Result<ProgramSolution> {
    solve_qp_l2_centered(spec, None)
}

/// KKT residual of `z` for the centered problem: distance of `z - center`
/// from the cone spanned by the (sign-constrained) active constraint
/// normals, plus primal feasibility. Small residual certifies optimality.
pub fn kkt_residual(spec: &LinearProgramSpec, z: &[f64], center: Option<&[f64]>) -> f64 {
    let n = spec.num_vars();
    let y = center.map(|c| c.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    // Gradient of 1/2||z - y||^2 must be a nonnegative combination of the
    // outward normals of active <=-constraints plus any combination of
    // equality normals. Solve the nonnegative least-squares approximately by
    // projecting onto the active span and clipping signs via a few
    // alternating passes.
    let mut normals: Vec<Vec<f64>> = Vec::new();
    let mut signed: Vec<bool> = Vec::new(); // true: multiplier must be >= 0
    for row in &spec.a_eq {
        normals.push(row.iter().map(|v| -v).collect());
        signed.push(false);
    }
    for (row, &b) in spec.a_le.iter().zip(&spec.b_le) {
        if (dot(row, z) - b).abs() <= 1e-7 {
            normals.push(row.iter().map(|v| -v).collect());
            signed.push(true);
        }
    }
    for (k, &(lo, hi)) in spec.bounds.iter().enumerate() {
        if hi.is_finite() && (z[k] - hi).abs() <= 1e-7 {
            let mut r = vec![0.0; n];
            r[k] = -1.0;
            normals.push(r);
            signed.push(true);
        }
        if lo.is_finite() && (z[k] - lo).abs() <= 1e-7 {
            let mut r = vec![0.0; n];
            r[k] = 1.0;
            normals.push(r);
            signed.push(true);
        }
    }
    let grad: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
    // Coordinate-descent on ||grad - sum mu_i n_i|| with sign clipping.
    let mut mu = vec![0.0; normals.len()];
    let mut resid = grad.clone();
    for _ in 0..200 {
        for (i, ni) in normals.iter().enumerate() {
            let nn = dot(ni, ni);
            if nn < 1e-14 {
                continue;
            }
            let step = dot(&resid, ni) / nn;
            let mut new_mu = mu[i] + step;
            if signed[i] && new_mu < 0.0 {
                new_mu = 0.0;
            }
            let delta = new_mu - mu[i];
            if delta != 0.0 {
                for (r, &nk) in resid.iter_mut().zip(ni) {
                    *r -= delta * nk;
                }
                mu[i] = new_mu;
            }
        }
    }
    let stationarity = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
    stationarity.max(spec.violation(z))
}

/// Min-norm solution of the consistent system `A u = b` and the multipliers
/// `lambda` with `u = A^T lambda`. Solves `(A A^T) lambda = b` by Gaussian
/// elimination with rank detection; dependent rows get zero multipliers.
fn min_norm_equality(a: &[&[f64]], b: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = a.len();
    if m == 0 {
        return (vec![0.0; n], vec![]);
    }
    let mut g = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            g[i][j] = dot(a[i], a[j]);
        }
        g[i][m] = b[i];
    }
    let lambda = solve_rank_deficient(&mut g, m);
    let mut u = vec![0.0; n];
    for (l, row) in lambda.iter().zip(a) {
        if *l != 0.0 {
            for (uk, &rk) in u.iter_mut().zip(*row) {
                *uk += l * rk;
            }
        }
    }
    (u, lambda)
}

/// Gaussian elimination with partial pivoting on an augmented system,
/// assigning zero to variables in rank-deficient directions. The input
/// system must be consistent.
fn solve_rank_deficient(aug: &mut [Vec<f64>], m: usize) -> Vec<f64> {
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..m {
        let (best, best_val) = (row..m)
            .map(|r| (r, aug[r][col].abs()))
            .fold((row, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_val < 1e-11 {
            continue;
        }
        aug.swap(row, best);
        let piv = aug[row][col];
        for x in aug[row].iter_mut() {
            *x /= piv;
        }
        let prow = aug[row].clone();
        for (r, arow) in aug.iter_mut().enumerate() {
            if r != row {
                let f = arow[col];
                if f != 0.0 {
                    for (x, &p) in arow.iter_mut().zip(&prow) {
                        *x -= f * p;
                    }
                }
            }
        }
        pivot_cols.push((row, col));
        row += 1;
        if row == m {
            break;
        }
    }
    let mut x = vec![0.0; m];
    for &(r, c) in &pivot_cols {
        x[c] = aug[r][m];
    }
    x
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_equality() {
        // min ||z|| s.t. z1 + z2 = 2 -> (1, 1)
        let mut spec = LinearProgramSpec::new(2);
        spec.a_eq = vec![vec![1.0, 1.0]];
        spec.b_eq = vec![2.0];
        let sol = solve_qp_l2(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.z[0] - 1.0).abs() < 1e-8);
        assert!((sol.z[1] - 1.0).abs() < 1e-8);
        assert!(kkt_residual(&spec, &sol.z, None) <= KKT_TOL);
    }

    #[test]
    fn projection_onto_halfspaces() {
        // min ||z|| s.t. z1 >= 1, z2 >= 0 -> (1, 0)
        let mut spec = LinearProgramSpec::new(2);
        spec.bounds = vec![(1.0, f64::INFINITY), (0.0, f64::INFINITY)];
        let sol = solve_qp_l2(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.z[0] - 1.0).abs() < 1e-8);
        assert!(sol.z[1].abs() < 1e-8);
        assert!((sol.objective_value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn infeasible_polytope() {
        let mut spec = LinearProgramSpec::new(1);
        spec.a_le = vec![vec![1.0]];
        spec.b_le = vec![-1.0];
        spec.bounds = vec![(0.0, f64::INFINITY)];
        let sol = solve_qp_l2(&spec).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn centered_projection() {
        // Project (2, 2) onto the unit box.
        let mut spec = LinearProgramSpec::new(2);
        spec.bounds = vec![(0.0, 1.0); 2];
        let sol = solve_qp_l2_centered(&spec, Some(&[2.0, 2.0])).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.z[0] - 1.0).abs() < 1e-8);
        assert!((sol.z[1] - 1.0).abs() < 1e-8);
    }

    /// Brute-force oracle: enumerate every subset of constraints as a
    /// candidate active set, solve the equality-constrained KKT system, and
    /// keep the best feasible point. Independent of the active-set path.
    fn brute_force_min_norm(spec: &LinearProgramSpec) -> Option<Vec<f64>> {
        let n = spec.num_vars();
        let mut rows: Vec<Vec<f64>> = spec.a_eq.clone();
        let mut rhs = spec.b_eq.clone();
        let num_eq = rows.len();
        for (row, &b) in spec.a_le.iter().zip(&spec.b_le) {
            rows.push(row.clone());
            rhs.push(b);
        }
        for (k, &(lo, hi)) in spec.bounds.iter().enumerate() {
            if hi.is_finite() {
                let mut r = vec![0.0; n];
                r[k] = 1.0;
                rows.push(r);
                rhs.push(hi);
            }
            if lo.is_finite() {
                let mut r = vec![0.0; n];
                r[k] = -1.0;
                rows.push(r);
                rhs.push(-lo);
            }
        }
        let num_ineq = rows.len() - num_eq;
        let mut best: Option<Vec<f64>> = None;
        let mut best_norm = f64::INFINITY;
        for mask in 0u64..(1 << num_ineq) {
            let mut a: Vec<&[f64]> = Vec::new();
            let mut b = Vec::new();
            for i in 0..num_eq {
                a.push(&rows[i]);
                b.push(rhs[i]);
            }
            for i in 0..num_ineq {
                if mask >> i & 1 == 1 {
                    a.push(&rows[num_eq + i]);
                    b.push(rhs[num_eq + i]);
                }
            }
            let (z, _) = min_norm_equality(&a, &b, n);
            // Check consistency of the candidate equality system and overall
            // feasibility.
            let consistent = a
                .iter()
                .zip(&b)
                .all(|(row, &bi)| (dot(row, &z) - bi).abs() < 1e-7);
            if !consistent || spec.violation(&z) > 1e-7 {
                continue;
            }
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < best_norm {
                best_norm = norm;
                best = Some(z);
            }
        }
        best
    }

    #[test]
    fn random_polytopes_match_kkt_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let mut spec = LinearProgramSpec::new(3);
            let rows = rng.gen_range(1..4);
            for _ in 0..rows {
                let row: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let b = rng.gen_range(-0.5..1.5);
                spec.a_le.push(row.iter().map(|v| -v).collect());
                spec.b_le.push(-b); // a . z >= b
            }
            spec.bounds = vec![(-2.0, 2.0); 3];
            let sol = solve_qp_l2(&spec).unwrap();
            let oracle = brute_force_min_norm(&spec);
            match (&sol.status, oracle) {
                (SolveStatus::Optimal, Some(z_oracle)) => {
                    let n_oracle = z_oracle.iter().map(|v| v * v).sum::<f64>().sqrt();
                    assert!(
                        (sol.objective_value - n_oracle).abs() < 1e-6,
                        "trial {trial}: solver {} vs oracle {n_oracle}",
                        sol.objective_value
                    );
                    assert!(sol.max_constraint_violation <= crate::linprog::FEAS_TOL);
                    assert!(kkt_residual(&spec, &sol.z, None) <= KKT_TOL);
                }
                (SolveStatus::Infeasible, None) => {}
                (s, o) => panic!("trial {trial}: status {s:?} vs oracle {:?}", o.is_some()),
            }
        }
    }
}
