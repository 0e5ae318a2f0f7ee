//! Epsilon-approximate minimization of `||z||_p` over a polyhedron for
//! `p` outside {1, 2, inf}.
//!
//! Those special exponents reduce to a linear or quadratic program and are
//! handled elsewhere; here the objective is the differentiable surrogate
//! `sum_k |z_k|^p`, which has the same minimizers as the norm, driven by
//! projected gradient descent with Armijo backtracking. Projections onto the
//! polyhedron are exact Euclidean projections computed by the L2 QP solver.

use crate::error::{Error, Result};
use crate::linprog::{LinearProgramSpec, ProgramSolution, SolveStatus};
use crate::model::pnorm;
use crate::qp::solve_qp_l2_centered;

/// `minimize ||z||_p` over the constraints of `spec` (objective field
/// ignored), to within `eps` of the optimal norm.
pub fn solve_pnorm_min(spec: &LinearProgramSpec, p: f64, eps: f64) -> Result<ProgramSolution> {
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "p-norm descent needs finite p > 1, got {p}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    spec.validate()?;
    let n = spec.num_vars();

    // Start from the minimum-L2 feasible point; it already has small
    // coordinates, which suits every p.
    let start = solve_qp_l2_centered(spec, None)?;
    if start.status == SolveStatus::Infeasible {
        return Ok(ProgramSolution::infeasible(n));
    }
    let mut z = start.z;
    let mut fz = surrogate(&z, p);

    let obj_tol = (eps * 1e-2).max(1e-14);
    // Iteration budget grows with log(1/eps); convergence is typically far
    // faster, the cap is a hard stop.
    let max_iter = 400 + (200.0 * (1.0 / eps).ln().max(1.0)) as usize;
    let mut step = 1.0_f64;
    let mut stalled = 0usize;
    let mut status = SolveStatus::IterationLimit;
    for _ in 0..max_iter {
        let grad: Vec<f64> = z
            .iter()
            .map(|&v| p * v.abs().powf(p - 1.0) * v.signum())
            .collect();
        // Backtracking on the projected step.
        let mut improved = false;
        let mut t = step;
        for _ in 0..40 {
            let target: Vec<f64> = z.iter().zip(&grad).map(|(v, g)| v - t * g).collect();
            let proj = solve_qp_l2_centered(spec, Some(&target))?;
            if proj.status == SolveStatus::Infeasible {
                break;
            }
            let f_new = surrogate(&proj.z, p);
            if f_new < fz - 1e-18 {
                let delta = fz - f_new;
                z = proj.z;
                fz = f_new;
                step = t * 1.5;
                improved = true;
                if delta < obj_tol * fz.max(1.0) {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                break;
            }
            t *= 0.5;
        }
        if !improved {
            stalled += 1;
            step *= 0.5;
        }
        if stalled >= 4 {
            status = SolveStatus::Optimal;
            break;
        }
    }

    let objective_value = pnorm(&z, p);
    let max_constraint_violation = spec.violation(&z);
    Ok(ProgramSolution { status, z, objective_value, max_constraint_violation })
}

fn surrogate(z: &[f64], p: f64) -> f64 {
    z.iter().map(|v| v.abs().powf(p)).sum()
}
