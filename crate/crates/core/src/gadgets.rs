//! Generators for the structured hardness-reduction instances, used as
//! stress tests with known combinatorial structure.
//!
//! All generated elections have two candidates fixed at the all-ones and
//! all-zeros positions; candidate 0 is the one the attacker supports. Each
//! generated voter carries a label naming its block (`V1`..`V7`, variable
//! blocks, clause voters) so tests can make structural assertions.

use crate::error::{Error, Result};
use crate::model::{ElectionInstance, StochasticModel};

/// Source instance for the weighted max-support reductions: `n'` binary
/// voters over `l'` issues, candidates implicitly all-ones / all-zeros.
#[derive(Debug, Clone)]
pub struct TcmsInstance {
    voters: Vec<Vec<f64>>,
    ell_prime: usize,
}

impl TcmsInstance {
    pub fn new(voters: Vec<Vec<f64>>) -> Result<Self> {
        if voters.is_empty() {
            return Err(Error::InvalidParameter("need at least one voter".into()));
        }
        let ell_prime = voters[0].len();
        if ell_prime == 0 {
            return Err(Error::InvalidParameter("need at least one issue".into()));
        }
        for row in &voters {
            if row.len() != ell_prime {
                return Err(Error::Dimension("ragged voter matrix".into()));
            }
            if row.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::InvalidParameter("positions must be binary".into()));
            }
        }
        Ok(Self { voters, ell_prime })
    }

    pub fn n_prime(&self) -> usize {
        self.voters.len()
    }

    pub fn ell_prime(&self) -> usize {
        self.ell_prime
    }

    pub fn voters(&self) -> &[Vec<f64>] {
        &self.voters
    }
}

/// Maximum votes for the all-ones candidate over binary weight selections
/// `w' in {0,1}^{l'} \ {0}` — the exhaustive answer for the source problem.
pub fn tcms_brute(t: &TcmsInstance) -> Result<usize> {
    let ell = t.ell_prime();
    if ell > 24 {
        return Err(Error::EnumerationCapExceeded(format!(
            "binary weight scan needs l' <= 24, got {ell}"
        )));
    }
    let mut best = 0usize;
    for mask in 1u32..(1u32 << ell) {
        let votes = t
            .voters
            .iter()
            .filter(|v| {
                // Signed agreement with the all-ones candidate over the
                // selected issues; ties go to candidate 0.
                let score: i64 = (0..ell)
                    .filter(|&k| mask >> k & 1 == 1)
                    .map(|k| if v[k] == 1.0 { 1i64 } else { -1 })
                    .sum();
                score >= 0
            })
            .count();
        best = best.max(votes);
    }
    Ok(best)
}

/// Copy counts for the forcing blocks of the weighted max-support gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetSizing {
    /// Per-shift copies (V2, V3, V4, V5, V6) = (8n'l', 8n'l', 4n', 2n', 2n'),
    /// giving block totals |V2| = |V3| = 8n'l'(l'+1), |V4| = 4n'l',
    /// |V5| = |V6| = 2n'l'.
    Large,
    /// Halved duplication (4n'l', 4n'l', 4n', n', n') per shift. With these
    /// counts the forcing blocks winnable at the structured optimum number
    /// exactly 8l'^2 n' + 13l' n' and the unwinnable remainder is l'n'.
    Balanced,
}

impl GadgetSizing {
    /// Copies per shift r for (V2 or V3, V4, V5 or V6).
    fn copies(&self, n_prime: usize, ell_prime: usize) -> (usize, usize, usize) {
        match self {
            GadgetSizing::Large => (8 * n_prime * ell_prime, 4 * n_prime, 2 * n_prime),
            GadgetSizing::Balanced => (4 * n_prime * ell_prime, 4 * n_prime, n_prime),
        }
    }
}

/// Block totals (|V2|, |V3|, |V4|, |V5|, |V6|) for a given sizing.
pub fn tcwms_block_sizes(
    sizing: GadgetSizing,
    n_prime: usize,
    ell_prime: usize,
) -> (usize, usize, usize, usize, usize) {
    let (v23, v4, v56) = sizing.copies(n_prime, ell_prime);
    (
        v23 * (ell_prime + 1),
        v23 * (ell_prime + 1),
        v4 * ell_prime,
        v56 * ell_prime,
        v56 * ell_prime,
    )
}

fn push_copies(
    voters: &mut Vec<Vec<f64>>,
    labels: &mut Vec<String>,
    pattern: Vec<f64>,
    label: String,
    copies: usize,
) {
    for _ in 0..copies {
        voters.push(pattern.clone());
        labels.push(label.clone());
    }
}

/// Weighted max-support gadget: embeds a binary source instance over
/// `l = 2l' + 2` issues and surrounds it with forcing blocks V2..V6 whose
/// copy counts make any optimum use a two-valued weight vector with
/// `w_k = w_{k + l' + 1}`.
///
/// Issue layout (0-based): positions `0..l'` mirror the source issues,
/// position `l'` is the first anchor, positions `l'+1..2l'+1` mirror the
/// source issues again, and position `2l'+1` is the second anchor.
pub fn build_tcwms_gadget(t: &TcmsInstance, sizing: GadgetSizing) -> Result<ElectionInstance> {
    let lp = t.ell_prime();
    let np = t.n_prime();
    let ell = 2 * lp + 2;
    let (v23_copies, v4_copies, v56_copies) = sizing.copies(np, lp);

    let mut voters: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();

    // V1: each source voter as <v', 1, v', 0>.
    for v in t.voters() {
        let mut row = vec![0.0; ell];
        for k in 0..lp {
            row[k] = v[k];
            row[lp + 1 + k] = v[k];
        }
        row[lp] = 1.0;
        row[2 * lp + 1] = 0.0;
        voters.push(row);
        labels.push("V1".into());
    }

    // V2: per shift r in 1..=l'+1, ones on the cyclic window of l' + 1
    // consecutive issues whose shifted residue (k + r) falls in 1..=l'+1,
    // residues taken in 1..=l. V3 holds the bitwise complements. Requiring
    // all of V2 and V3 to vote for candidate 0 pins each window's weight to
    // exactly half, and that linear system has the mirrored weights
    // w_k = w_{k + l' + 1} as its unique simplex solution.
    for r in 1..=lp + 1 {
        let pattern: Vec<f64> = (1..=ell)
            .map(|k| {
                let residue = (k + r) % ell;
                if (1..=lp + 1).contains(&residue) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let complement: Vec<f64> = pattern.iter().map(|v| 1.0 - v).collect();
        push_copies(&mut voters, &mut labels, pattern, format!("V2:r={r}"), v23_copies);
        push_copies(&mut voters, &mut labels, complement, format!("V3:r={r}"), v23_copies);
    }

    // V4 / V5 / V6: per shift r in 1..=l' (0-based index r-1). All three
    // zero out the mirrored pair (r, r + l' + 1) or saturate it, and fill
    // the remaining pairs with (1, 0) so those contributions cancel under
    // w_k = w_{k + l' + 1}.
    for r in 1..=lp {
        let mut base = vec![0.0; ell];
        for k in 0..lp {
            if k != r - 1 {
                base[k] = 1.0;
                base[lp + 1 + k] = 0.0;
            }
        }
        // V4: anchors on, pair r off -> votes for candidate 0 iff the
        // anchor pair outweighs pair r.
        let mut v4 = base.clone();
        v4[lp] = 1.0;
        v4[2 * lp + 1] = 1.0;
        push_copies(&mut voters, &mut labels, v4, format!("V4:r={r}"), v4_copies);
        // V5: first anchor on only, pair r off -> votes for candidate 0
        // iff w_r = 0.
        let mut v5 = base.clone();
        v5[lp] = 1.0;
        v5[2 * lp + 1] = 0.0;
        push_copies(&mut voters, &mut labels, v5, format!("V5:r={r}"), v56_copies);
        // V6: anchors off, pair r on -> votes for candidate 0 iff
        // w_r >= w_{l'+1}.
        let mut v6 = base;
        v6[r - 1] = 1.0;
        v6[lp + 1 + (r - 1)] = 1.0;
        v6[lp] = 0.0;
        v6[2 * lp + 1] = 0.0;
        push_copies(&mut voters, &mut labels, v6, format!("V6:r={r}"), v56_copies);
    }

    let candidates = vec![vec![1.0; ell], vec![0.0; ell]];
    let weights = vec![1.0 / ell as f64; ell];
    ElectionInstance::with_labels(candidates, voters, weights, 1.0, Some(labels))
}

/// Plurality variant: the max-support gadget plus a block V7 of
/// `8l'^2 n' + 12l' n'` voters agreeing with candidate 1 on every issue,
/// so the embedded source voters decide the plurality.
pub fn build_tcwp_gadget(t: &TcmsInstance, sizing: GadgetSizing) -> Result<ElectionInstance> {
    let base = build_tcwms_gadget(t, sizing)?;
    let lp = t.ell_prime();
    let np = t.n_prime();
    let ell = 2 * lp + 2;
    let block = 8 * lp * lp * np + 12 * lp * np;
    let mut voters = base.voters().to_vec();
    let mut labels = base.voter_labels().expect("gadget voters are labeled").to_vec();
    for _ in 0..block {
        voters.push(vec![0.0; ell]);
        labels.push("V7".into());
    }
    base.with_voters(voters, Some(labels))
}

/// Sparse-tier gadget: embeds the source voters over `l = n'^2 l'^2` issues,
/// giving voter `j` (1-based, in tier order) a private ones-block at
/// positions `l' + (j^2+j)/2 ..= l' + (j^2+3j)/2` (1-based), length `j + 1`.
/// The private blocks are pairwise disjoint, so each voter occupies its own
/// agreement tier.
pub fn build_theta_l_gadget(t: &TcmsInstance) -> Result<ElectionInstance> {
    let lp = t.ell_prime();
    let np = t.n_prime();
    let ell = np * np * lp * lp;
    let last_end = lp + (np * np + 3 * np) / 2;
    if last_end > ell {
        return Err(Error::InvalidParameter(format!(
            "private block of voter {np} ends at issue {last_end}, past l = {ell}"
        )));
    }

    // Tier order: ascending agreement count with the all-ones candidate on
    // the source issues.
    let mut order: Vec<usize> = (0..np).collect();
    order.sort_by_key(|&j| {
        let agree = t.voters()[j].iter().filter(|&&v| v == 1.0).count();
        (agree, j)
    });

    let mut voters = Vec::with_capacity(np);
    let mut labels = Vec::with_capacity(np);
    for (pos, &orig) in order.iter().enumerate() {
        let j = pos + 1; // 1-based creation index drives the block offsets
        let mut row = vec![0.0; ell];
        row[..lp].copy_from_slice(&t.voters()[orig]);
        let start = (j * j + j) / 2;
        let end = (j * j + 3 * j) / 2;
        for k in start..=end {
            row[lp + k - 1] = 1.0;
        }
        voters.push(row);
        labels.push(format!("T:j={j}:src={orig}"));
    }

    let candidates = vec![vec![1.0; ell], vec![0.0; ell]];
    let weights = vec![1.0 / ell as f64; ell];
    ElectionInstance::with_labels(candidates, voters, weights, 1.0, Some(labels))
}

/// One literal of a 2-CNF clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

/// A 2-CNF formula: clauses are pairs of literals over distinct variables.
#[derive(Debug, Clone)]
pub struct Max2SatFormula {
    num_vars: usize,
    clauses: Vec<(Literal, Literal)>,
}

impl Max2SatFormula {
    pub fn new(num_vars: usize, clauses: Vec<(Literal, Literal)>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidParameter("need at least one variable".into()));
        }
        for (a, b) in &clauses {
            if a.var >= num_vars || b.var >= num_vars {
                return Err(Error::IndexOutOfRange(format!(
                    "literal variable out of range in clause ({a:?}, {b:?})"
                )));
            }
            if a.var == b.var {
                return Err(Error::InvalidParameter(
                    "clause literals must use distinct variables".into(),
                ));
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[(Literal, Literal)] {
        &self.clauses
    }

    pub fn satisfied_count(&self, assignment: &[bool]) -> usize {
        self.clauses
            .iter()
            .filter(|(a, b)| {
                (assignment[a.var] != a.negated) || (assignment[b.var] != b.negated)
            })
            .count()
    }
}

/// Exhaustive optimum of a 2-CNF formula over all `2^l` assignments.
pub fn max2sat_brute(phi: &Max2SatFormula) -> Result<usize> {
    if phi.num_vars > 20 {
        return Err(Error::EnumerationCapExceeded(format!(
            "assignment scan needs at most 20 variables, got {}",
            phi.num_vars
        )));
    }
    let mut best = 0usize;
    for mask in 0u32..(1u32 << phi.num_vars) {
        let assignment: Vec<bool> = (0..phi.num_vars).map(|k| mask >> k & 1 == 1).collect();
        best = best.max(phi.satisfied_count(&assignment));
    }
    Ok(best)
}

/// Output of [`build_max2sat_gadget`], keeping the effective coefficients
/// visible for structural tests.
#[derive(Debug, Clone)]
pub struct Max2SatGadget {
    pub instance: ElectionInstance,
    pub model: StochasticModel,
    pub beta1: f64,
    /// `beta2` after the agreement adjustment (see below), possibly
    /// different from the requested value.
    pub beta2: f64,
    pub anchor_size: usize,
    pub var_block1_size: usize,
    pub var_block2_size: usize,
}

/// Stochastic-voting gadget for a 2-CNF formula: `l + 1` issues, a large
/// anchor block pushing weight onto the extra issue, per-variable blocks of
/// `n^2 beta1` and `n^2 beta2` voters, and one voter per clause.
///
/// Clause encodings (positions not listed are 0.5, which contributes
/// nothing to any preference vector):
/// - `( b_r1 |  b_r2)`: `v_r1 = v_r2 = 0`, `v_{l+1} = 1`
/// - `(!b_r1 |  b_r2)`: `v_r1 = 0`, `v_r2 = 1`
/// - `(!b_r1 | !b_r2)`: `v_r1 = v_r2 = 1`, `v_{l+1} = 0`
///
/// The per-variable blocks are meant to be indifferent between the two
/// extreme values of `w_k`; the requested `beta2` is adjusted (scaled) when
/// the extreme sums `beta1*s(-w_k - 3/4) + beta2*s(w_k - 3/4)` disagree at
/// `w_k = 0` versus `w_k = 1`, where `s` is the sigmoid with sharpness
/// `alpha`.
pub fn build_max2sat_gadget(
    phi: &Max2SatFormula,
    beta1: f64,
    beta2: f64,
    alpha: f64,
) -> Result<Max2SatGadget> {
    if !(beta1 > 0.0) || !(beta2 > 0.0) {
        return Err(Error::InvalidParameter("beta coefficients must be positive".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter("sharpness must be positive".into()));
    }
    let ell = phi.num_vars();
    let n = phi.clauses().len();
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one clause".into()));
    }
    let sigmoid = |x: f64| 1.0 / (1.0 + (-alpha * x).exp());

    // Agreement check at the weight extremes: value at w_k = 0 is
    // (beta1 + beta2) s(-3/4); at w_k = 1 it is beta1 s(-7/4) + beta2 s(1/4).
    let at0 = |b2: f64| (beta1 + b2) * sigmoid(-0.75);
    let at1 = |b2: f64| beta1 * sigmoid(-1.75) + b2 * sigmoid(0.25);
    let beta2 = if (at0(beta2) - at1(beta2)).abs() <= 1e-9 * beta1 {
        beta2
    } else {
        beta1 * (sigmoid(-0.75) - sigmoid(-1.75)) / (sigmoid(0.25) - sigmoid(-0.75))
    };

    let mut voters: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();

    let nn = (n * n) as f64;
    let anchor_size =
        (4.0 * (ell * ell) as f64 * nn * (beta1 + beta2)).round() as usize;
    let var_block1_size = (nn * beta1).round() as usize;
    let var_block2_size = (nn * beta2).round() as usize;

    let mut anchor = vec![0.0; ell + 1];
    anchor[ell] = 1.0;
    push_copies(&mut voters, &mut labels, anchor, "anchor".into(), anchor_size);

    for r in 0..ell {
        let mut b1 = vec![0.5; ell + 1];
        b1[r] = 1.0;
        b1[ell] = 0.0;
        push_copies(&mut voters, &mut labels, b1, format!("var1:r={r}"), var_block1_size);
        let mut b2 = vec![0.5; ell + 1];
        b2[r] = 0.0;
        push_copies(&mut voters, &mut labels, b2, format!("var2:r={r}"), var_block2_size);
    }

    for (j, (a, b)) in phi.clauses().iter().enumerate() {
        // Canonical order: a positive literal never precedes a negated one
        // in the encoding table, so swap mixed clauses into (!x | y) form.
        let (first, second) = if a.negated || !b.negated { (*a, *b) } else { (*b, *a) };
        let mut row = vec![0.5; ell + 1];
        match (first.negated, second.negated) {
            (false, false) => {
                row[first.var] = 0.0;
                row[second.var] = 0.0;
                row[ell] = 1.0;
            }
            (true, false) => {
                row[first.var] = 0.0;
                row[second.var] = 1.0;
            }
            (true, true) => {
                row[first.var] = 1.0;
                row[second.var] = 1.0;
                row[ell] = 0.0;
            }
            (false, true) => unreachable!("swapped above"),
        }
        voters.push(row);
        labels.push(format!("clause:{j}"));
    }

    let candidates = vec![vec![1.0; ell + 1], vec![0.0; ell + 1]];
    let weights = vec![1.0 / (ell + 1) as f64; ell + 1];
    let instance =
        ElectionInstance::with_labels(candidates, voters, weights, 1.0, Some(labels))?;
    let model = StochasticModel::Sigmoid { alpha };
    Ok(Max2SatGadget {
        instance,
        model,
        beta1,
        beta2,
        anchor_size,
        var_block1_size,
        var_block2_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{deterministic_tally, preference_tensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn count_label(inst: &ElectionInstance, prefix: &str) -> usize {
        inst.voter_labels()
            .unwrap()
            .iter()
            .filter(|l| l.as_str() == prefix || l.starts_with(&format!("{prefix}:")))
            .count()
    }

    #[test]
    fn tcms_brute_hand_cases() {
        // Single voter at the all-ones position: weight {1} wins it.
        let t = TcmsInstance::new(vec![vec![1.0]]).unwrap();
        assert_eq!(tcms_brute(&t).unwrap(), 1);
        // Voter at all-zeros: never wins (score -1 on every pattern).
        let t = TcmsInstance::new(vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(tcms_brute(&t).unwrap(), 0);
        // Two opposed voters on one issue: ties go to candidate 0.
        let t = TcmsInstance::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(tcms_brute(&t).unwrap(), 2);
    }

    #[test]
    fn tcwms_block_sizes_match_closed_forms() {
        for np in 1..=2 {
            for lp in 1..=2 {
                let t = TcmsInstance::new(vec![vec![1.0; lp]; np]).unwrap();
                let inst = build_tcwms_gadget(&t, GadgetSizing::Large).unwrap();
                let (v2, v3, v4, v5, v6) = tcwms_block_sizes(GadgetSizing::Large, np, lp);
                assert_eq!(v2, 8 * np * lp * (lp + 1));
                assert_eq!(count_label(&inst, "V1"), np);
                assert_eq!(count_label(&inst, "V2"), v2);
                assert_eq!(count_label(&inst, "V3"), v3);
                assert_eq!(count_label(&inst, "V4"), v4);
                assert_eq!(v4, 4 * np * lp);
                assert_eq!(count_label(&inst, "V5"), v5);
                assert_eq!(count_label(&inst, "V6"), v6);
                assert_eq!(v5, 2 * np * lp);
            }
        }
        // Smallest case: 40 constructed voters plus the embedded one.
        let t = TcmsInstance::new(vec![vec![1.0]]).unwrap();
        let inst = build_tcwms_gadget(&t, GadgetSizing::Large).unwrap();
        assert_eq!(inst.num_voters(), 41);
    }

    #[test]
    fn tcwms_candidates_and_complements() {
        let t = TcmsInstance::new(vec![vec![1.0, 0.0]]).unwrap();
        let inst = build_tcwms_gadget(&t, GadgetSizing::Large).unwrap();
        assert!(inst.candidates()[0].iter().all(|&v| v == 1.0));
        assert!(inst.candidates()[1].iter().all(|&v| v == 0.0));
        let labels = inst.voter_labels().unwrap();
        // Every V3 voter is the exact complement of a V2 voter.
        for (j, label) in labels.iter().enumerate() {
            if label.starts_with("V3:") {
                let twin = label.replace("V3:", "V2:");
                let partner = labels
                    .iter()
                    .position(|l| *l == twin)
                    .expect("matching V2 shift exists");
                let v3 = &inst.voters()[j];
                let v2 = &inst.voters()[partner];
                assert!(v3.iter().zip(v2).all(|(a, b)| (a + b - 1.0).abs() < 1e-15));
            }
        }
    }

    #[test]
    fn tcwp_appends_hopeless_block() {
        let t = TcmsInstance::new(vec![vec![1.0]]).unwrap();
        let base = build_tcwms_gadget(&t, GadgetSizing::Large).unwrap();
        let plur = build_tcwp_gadget(&t, GadgetSizing::Large).unwrap();
        assert_eq!(plur.num_voters(), base.num_voters() + 20);
        assert_eq!(count_label(&plur, "V7"), 20);
        // The appended voters never vote for candidate 0 under any simplex
        // weight vector: sample random weights.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ell = plur.num_issues();
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..ell).map(|_| rng.gen_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let tally = deterministic_tally(&plur, &w).unwrap();
            for (j, label) in plur.voter_labels().unwrap().iter().enumerate() {
                if label == "V7" {
                    assert_eq!(tally.chosen[j], 1);
                }
            }
        }
    }

    #[test]
    fn theta_l_blocks_disjoint_and_sized() {
        let t = TcmsInstance::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let inst = build_theta_l_gadget(&t).unwrap();
        assert_eq!(inst.num_issues(), 2 * 2 * 2 * 2);
        let lp = 2;
        let mut owner = vec![None; inst.num_issues()];
        for (j, voter) in inst.voters().iter().enumerate() {
            let ones: Vec<usize> =
                (lp..inst.num_issues()).filter(|&k| voter[k] == 1.0).collect();
            // Block length is creation index + 1 and the block is contiguous.
            assert_eq!(ones.len(), j + 2);
            assert_eq!(ones[ones.len() - 1] - ones[0] + 1, ones.len());
            for k in ones {
                assert!(owner[k].is_none(), "issue {k} claimed twice");
                owner[k] = Some(j);
            }
        }
    }

    #[test]
    fn theta_l_overflow_rejected() {
        // n' = 1, l' = 1: l = 1 but the first block ends at issue 1 + 2.
        let t = TcmsInstance::new(vec![vec![1.0]]).unwrap();
        assert!(build_theta_l_gadget(&t).is_err());
    }

    #[test]
    fn max2sat_brute_hand_cases() {
        let lit = |var: usize, negated: bool| Literal { var, negated };
        let phi =
            Max2SatFormula::new(2, vec![(lit(0, false), lit(1, false))]).unwrap();
        assert_eq!(max2sat_brute(&phi).unwrap(), 1);
        // (b0 | b1) and (!b0 | !b1): both satisfiable together.
        let phi = Max2SatFormula::new(
            2,
            vec![
                (lit(0, false), lit(1, false)),
                (lit(0, true), lit(1, true)),
            ],
        )
        .unwrap();
        assert_eq!(max2sat_brute(&phi).unwrap(), 2);
    }

    #[test]
    fn max2sat_brute_matches_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let nv = 3;
            let clauses: Vec<(Literal, Literal)> = (0..5)
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
            let phi = Max2SatFormula::new(nv, clauses).unwrap();
            // Independent recount: maximize satisfied_count by scanning
            // assignments in the opposite bit order.
            let mut best = 0;
            for mask in (0u32..1 << nv).rev() {
                let assignment: Vec<bool> =
                    (0..nv).map(|k| mask >> k & 1 == 1).collect();
                best = best.max(phi.satisfied_count(&assignment));
            }
            assert_eq!(max2sat_brute(&phi).unwrap(), best);
        }
    }

    #[test]
    fn max2sat_gadget_structure() {
        let lit = |var: usize, negated: bool| Literal { var, negated };
        let phi = Max2SatFormula::new(
            2,
            vec![(lit(0, false), lit(1, false)), (lit(0, true), lit(1, true))],
        )
        .unwrap();
        let g = build_max2sat_gadget(&phi, 2.0, 2.0, 4.0).unwrap();
        let n = 2usize;
        let ell = 2usize;
        assert_eq!(g.instance.num_issues(), ell + 1);
        // Total voter count matches the sum of block sizes.
        let expected = g.anchor_size + ell * (g.var_block1_size + g.var_block2_size) + n;
        assert_eq!(g.instance.num_voters(), expected);
        // Positive-positive clause voter per the encoding table.
        let labels = g.instance.voter_labels().unwrap();
        let j = labels.iter().position(|l| l == "clause:0").unwrap();
        assert_eq!(g.instance.voters()[j], vec![0.0, 0.0, 1.0]);
        // Negated-negated clause.
        let j = labels.iter().position(|l| l == "clause:1").unwrap();
        assert_eq!(g.instance.voters()[j], vec![1.0, 1.0, 0.0]);
        // The beta adjustment enforces agreement at the extremes.
        let s = |x: f64| 1.0 / (1.0 + (-4.0 * x).exp());
        let at0 = (g.beta1 + g.beta2) * s(-0.75);
        let at1 = g.beta1 * s(-1.75) + g.beta2 * s(0.25);
        assert!((at0 - at1).abs() < 1e-9);
    }

    #[test]
    fn max2sat_gadget_preference_signs() {
        // The half positions contribute zero to every preference vector.
        let lit = |var: usize, negated: bool| Literal { var, negated };
        let phi = Max2SatFormula::new(
            3,
            vec![(lit(0, true), lit(2, false))],
        )
        .unwrap();
        let g = build_max2sat_gadget(&phi, 1.0, 1.0, 5.0).unwrap();
        let tensor = preference_tensor(&g.instance);
        let labels = g.instance.voter_labels().unwrap();
        let j = labels.iter().position(|l| l == "clause:0").unwrap();
        assert_eq!(tensor.rival(j, 1), &[-1.0, 0.0, 1.0, 0.0]);
    }
}
