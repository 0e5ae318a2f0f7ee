//! Scratch driver: empirical sanity check of the max-support gadget
//! optimum against its closed-form count. Run with `cargo run --release
//! --example gadget_check`.

use election_control::gadgets::{
    build_tcwms_gadget, tcms_brute, GadgetSizing, TcmsInstance,
};
use election_control::model::AttackConstraint;
use election_control::solvers::max_support;
fn main() {
    // Per size combo, a source instance whose exhaustive optimum equals n'
    // (some issue selection wins every source voter), so the tie-everything
    // empty-selection weight vector cannot beat the embedded optimum.
    let sources: Vec<Vec<Vec<f64>>> = vec![
        vec![vec![1.0]],
        vec![vec![1.0, 0.0]],
        vec![vec![1.0], vec![1.0]],
        vec![vec![1.0, 0.0], vec![1.0, 1.0]],
    ];
    for voters in sources {
        {
            let np = voters.len();
            let lp = voters[0].len();
            let t = TcmsInstance::new(voters.clone()).unwrap();
            let alpha = tcms_brute(&t).unwrap();
            let inst = build_tcwms_gadget(&t, GadgetSizing::Balanced).unwrap();
            let ell = inst.num_issues();
            let constraint = AttackConstraint::IntervalBox {
                intervals: vec![(0.0, 1.0); ell],
            };
            let start = std::time::Instant::now();
            let sol = max_support(&inst, &constraint, 1e-6).unwrap();
            let predicted = 8 * lp * lp * np + 13 * lp * np + alpha;
            let w: Vec<f64> = inst
                .weights()
                .iter()
                .zip(&sol.x)
                .map(|(w, x)| w + x)
                .collect();
            println!(
                "n'={np} l'={lp} voters={:?} alpha={alpha} predicted={predicted} got={:?} time={:?}",
                voters,
                sol.votes_for_c1,
                start.elapsed()
            );
            println!("  w = {w:?}");
        }
    }
}
