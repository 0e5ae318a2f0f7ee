//! Scratch driver: tests whether the sigmoid clause gadget's restricted
//! binary weight search decodes to an optimal 2-CNF assignment, across
//! several weight families, decode conventions, and variable-block
//! conventions. Run with `cargo run --release --example max2sat_check`.

use election_control::gadgets::{
    build_max2sat_gadget, max2sat_brute, Literal, Max2SatFormula,
};
use election_control::model::{expected_votes, ElectionInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_formula(rng: &mut ChaCha8Rng, nv: usize, nc: usize) -> Max2SatFormula {
    let clauses: Vec<(Literal, Literal)> = (0..nc)
        .map(|_| {
            let a = rng.gen_range(0..nv);
            let mut b = rng.gen_range(0..nv - 1);
            if b >= a {
                b += 1;
            }
            (
                Literal { var: a, negated: rng.gen_bool(0.5) },
                Literal { var: b, negated: rng.gen_bool(0.5) },
            )
        })
        .collect();
    Max2SatFormula::new(nv, clauses).unwrap()
}

/// Variable-block conventions: the constructed voters as listed, or the
/// voters implied by the displayed objective function.
fn flip_var_blocks(inst: &ElectionInstance) -> ElectionInstance {
    let ell = inst.num_issues() - 1;
    let labels = inst.voter_labels().unwrap().to_vec();
    let voters: Vec<Vec<f64>> = inst
        .voters()
        .iter()
        .zip(&labels)
        .map(|(v, label)| {
            let mut v = v.clone();
            if let Some(rest) = label.strip_prefix("var1:r=") {
                let r: usize = rest.parse().unwrap();
                v[r] = 0.0; // listed: 1
                v[ell] = 0.0;
            } else if let Some(rest) = label.strip_prefix("var2:r=") {
                let r: usize = rest.parse().unwrap();
                v[r] = 1.0; // listed: 0
                v[ell] = 0.0; // listed: 0.5
            }
            v
        })
        .collect();
    inst.with_voters(voters, Some(labels)).unwrap()
}

/// Weight vector for mask S under a family; returns None if invalid.
fn family_weights(family: usize, mask: u32, ell: usize) -> Option<Vec<f64>> {
    let sel: Vec<usize> = (0..ell).filter(|&k| mask >> k & 1 == 1).collect();
    let mut w = vec![0.0; ell + 1];
    match family {
        // tiny fixed increment c = 1/(4 ell), remainder on the anchor
        0 => {
            let c = 1.0 / (4.0 * ell as f64);
            for &k in &sel {
                w[k] = c;
            }
            w[ell] = 1.0 - c * sel.len() as f64;
        }
        // fixed variable mass 1/4 split evenly, anchor at 3/4
        1 => {
            if sel.is_empty() {
                w[ell] = 1.0;
            } else {
                let c = 0.25 / sel.len() as f64;
                for &k in &sel {
                    w[k] = c;
                }
                w[ell] = 0.75;
            }
        }
        // uniform over selected variables only, anchor 0
        2 => {
            if sel.is_empty() {
                return None;
            }
            let c = 1.0 / sel.len() as f64;
            for &k in &sel {
                w[k] = c;
            }
        }
        // uniform over selected variables plus the anchor
        3 => {
            let c = 1.0 / (sel.len() + 1) as f64;
            for &k in &sel {
                w[k] = c;
            }
            w[ell] = c;
        }
        _ => unreachable!(),
    }
    Some(w)
}

fn main() {
    let nformulas = 20;
    let nv_max = 4;
    let nc = 10;
    let mut formulas = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..nformulas {
        let nv = rng.gen_range(2..=nv_max);
        formulas.push(random_formula(&mut rng, nv, nc));
    }

    // hits[block_convention][family][decode] = formulas where the decoded
    // assignment attains the brute-force optimum
    let mut hits = [[[0usize; 2]; 4]; 2];
    let mut gaps: Vec<String> = Vec::new();

    for (fi, phi) in formulas.iter().enumerate() {
        let best = max2sat_brute(phi).unwrap();
        let g = build_max2sat_gadget(phi, 10.0, 10.0, 10.0).unwrap();
        let ell = phi.num_vars();
        for (bc, inst) in [g.instance.clone(), flip_var_blocks(&g.instance)]
            .iter()
            .enumerate()
        {
            for family in 0..4 {
                // argmax of expected votes over the family
                let mut best_mask = None;
                let mut best_val = f64::NEG_INFINITY;
                for mask in 0..(1u32 << ell) {
                    let Some(w) = family_weights(family, mask, ell) else {
                        continue;
                    };
                    let ev = expected_votes(inst, &w, &g.model).unwrap().value;
                    if ev > best_val {
                        best_val = ev;
                        best_mask = Some(mask);
                    }
                }
                let mask = best_mask.unwrap();
                for decode in 0..2 {
                    let assignment: Vec<bool> = (0..ell)
                        .map(|k| (mask >> k & 1 == 1) == (decode == 0))
                        .collect();
                    let sat = phi.satisfied_count(&assignment);
                    if sat == best {
                        hits[bc][family][decode] += 1;
                    } else if bc == 1 && family == 1 {
                        gaps.push(format!(
                            "formula {fi}: best {best}, decoded {sat}, mask {mask:04b}"
                        ));
                    }
                }
            }
        }
    }

    for bc in 0..2 {
        let name = if bc == 0 { "listed blocks" } else { "objective blocks" };
        for family in 0..4 {
            println!(
                "{name} family {family}: decode in-set={}/{} decode out-set={}/{}",
                hits[bc][family][0], nformulas, hits[bc][family][1], nformulas
            );
        }
    }
    for gline in &gaps {
        println!("  {gline}");
    }
}
