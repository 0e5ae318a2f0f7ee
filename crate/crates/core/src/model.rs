//! Immutable election model: instances, weighted distances, preference
//! vectors, deterministic tallying, and stochastic expected-vote evaluation.
//!
//! Candidate 0 is always the attacker's preferred candidate; no re-indexing
//! is provided.

use crate::error::{Error, Result};

/// Tie tolerance for distance / inner-product comparisons. LP witnesses
/// satisfy their constraints only to solver tolerance, so exact comparisons
/// would misclassify boundary voters.
pub const TIE_TOL: f64 = 1e-9;
/// Tolerance for simplex membership of a weight vector.
pub const SUM_TOL: f64 = 1e-9;
/// Tolerance before a linear stochastic model's out-of-range values raise a
/// warning flag.
pub const PROB_TOL: f64 = 1e-6;

/// An election in the spatial model: `m` candidates and `n` voters placed in
/// `ell`-dimensional issue space, a shared issue-importance vector `w` on the
/// simplex, and a distance exponent `p >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectionInstance {
    candidates: Vec<Vec<f64>>,
    voters: Vec<Vec<f64>>,
    weights: Vec<f64>,
    p: f64,
    voter_labels: Option<Vec<String>>,
}

impl ElectionInstance {
    pub fn new(
        candidates: Vec<Vec<f64>>,
        voters: Vec<Vec<f64>>,
        weights: Vec<f64>,
        p: f64,
    ) -> Result<Self> {
        Self::with_labels(candidates, voters, weights, p, None)
    }

    /// Build an instance whose voters carry provenance labels (used by the
    /// hardness gadget generators for structural assertions).
    pub fn with_labels(
        candidates: Vec<Vec<f64>>,
        voters: Vec<Vec<f64>>,
        weights: Vec<f64>,
        p: f64,
        voter_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let ell = weights.len();
        if ell == 0 {
            return Err(Error::InvalidParameter("need at least one issue".into()));
        }
        if candidates.len() < 2 {
            return Err(Error::InvalidParameter("need at least two candidates".into()));
        }
        if voters.is_empty() {
            return Err(Error::InvalidParameter("need at least one voter".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
        }
        for (i, c) in candidates.iter().enumerate() {
            if c.len() != ell {
                return Err(Error::Dimension(format!(
                    "candidate {i} has {} issues, expected {ell}",
                    c.len()
                )));
            }
        }
        for (j, v) in voters.iter().enumerate() {
            if v.len() != ell {
                return Err(Error::Dimension(format!(
                    "voter {j} has {} issues, expected {ell}",
                    v.len()
                )));
            }
        }
        if let Some(labels) = &voter_labels {
            if labels.len() != voters.len() {
                return Err(Error::Dimension(format!(
                    "{} voter labels for {} voters",
                    labels.len(),
                    voters.len()
                )));
            }
        }
        check_simplex(&weights)?;
        Ok(Self { candidates, voters, weights, p, voter_labels })
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn num_voters(&self) -> usize {
        self.voters.len()
    }

    pub fn num_issues(&self) -> usize {
        self.weights.len()
    }

    pub fn candidates(&self) -> &[Vec<f64>] {
        &self.candidates
    }

    pub fn voters(&self) -> &[Vec<f64>] {
        &self.voters
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn voter_labels(&self) -> Option<&[String]> {
        self.voter_labels.as_deref()
    }

    /// Instance identical to `self` except for the voter set. Labels are
    /// dropped unless `labels` is given.
    pub fn with_voters(&self, voters: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        Self::with_labels(self.candidates.clone(), voters, self.weights.clone(), self.p, labels)
    }
}

/// Verify that `w` lies on the probability simplex within [`SUM_TOL`].
pub fn check_simplex(w: &[f64]) -> Result<()> {
    for (k, &wk) in w.iter().enumerate() {
        if !(-SUM_TOL..=1.0 + SUM_TOL).contains(&wk) {
            return Err(Error::Simplex(format!("w[{k}] = {wk} outside [0, 1]")));
        }
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::Simplex(format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

/// The attacker's budget under the normed constraint; `Unbounded` stands for
/// `B = +inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Finite(f64),
    Unbounded,
}

impl Budget {
    pub fn as_f64(&self) -> f64 {
        match self {
            Budget::Finite(b) => *b,
            Budget::Unbounded => f64::INFINITY,
        }
    }
}

/// Restriction on the attacker's perturbation `x`: either `||x||_p <= B` or a
/// per-issue interval box that `w + x` must inhabit.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackConstraint {
    NormBudget { p_norm: f64, budget: Budget },
    IntervalBox { intervals: Vec<(f64, f64)> },
}

impl AttackConstraint {
    pub fn validate(&self, ell: usize) -> Result<()> {
        match self {
            AttackConstraint::NormBudget { p_norm, budget } => {
                if !(*p_norm >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "norm exponent must be >= 1, got {p_norm}"
                    )));
                }
                if let Budget::Finite(b) = budget {
                    if !(*b >= 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "budget must be >= 0, got {b}"
                        )));
                    }
                }
                Ok(())
            }
            AttackConstraint::IntervalBox { intervals } => {
                if intervals.len() != ell {
                    return Err(Error::Dimension(format!(
                        "{} intervals for {ell} issues",
                        intervals.len()
                    )));
                }
                for (k, &(lo, hi)) in intervals.iter().enumerate() {
                    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "interval {k} = [{lo}, {hi}] is not a subinterval of [0, 1]"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Per voter `j` and rival candidate `i >= 1`, the per-issue preference
/// vector for candidate 0 over candidate `i`:
/// `a[j][i-1][k] = |c_{i,k} - v_{j,k}|^p - |c_{0,k} - v_{j,k}|^p`.
///
/// Comparisons run on the p-th-power scale throughout: since t -> t^{1/p} is
/// monotone, d_{i,j} >= d_{0,j} iff <w, a_j^{(i)}> >= 0, and the power form
/// is exact on binary instances (entries are -1, 0, or 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceTensor {
    a: Vec<Vec<Vec<f64>>>,
}

impl PreferenceTensor {
    /// `a_j^{(i)}` for rival candidate index `i` (1-based within the
    /// candidate list, i.e. `i >= 1`).
    pub fn rival(&self, j: usize, i: usize) -> &[f64] {
        &self.a[j][i - 1]
    }

    pub fn num_voters(&self) -> usize {
        self.a.len()
    }
}

/// Compute the preference tensor of an instance.
pub fn preference_tensor(inst: &ElectionInstance) -> PreferenceTensor {
    let p = inst.p();
    let c0 = &inst.candidates()[0];
    let a = inst
        .voters()
        .iter()
        .map(|v| {
            inst.candidates()[1..]
                .iter()
                .map(|ci| pairwise_preference(ci, c0, v, p))
                .collect()
        })
        .collect();
    PreferenceTensor { a }
}

/// Generalized preference vector of candidate `top` over candidate `rival`
/// for voter `j`: entry `k` is `|c_{rival,k} - v_{j,k}|^p - |c_{top,k} - v_{j,k}|^p`.
pub fn generalized_preference(
    inst: &ElectionInstance,
    j: usize,
    top: usize,
    rival: usize,
) -> Vec<f64> {
    pairwise_preference(
        &inst.candidates()[rival],
        &inst.candidates()[top],
        &inst.voters()[j],
        inst.p(),
    )
}

fn pairwise_preference(rival: &[f64], top: &[f64], voter: &[f64], p: f64) -> Vec<f64> {
    rival
        .iter()
        .zip(top)
        .zip(voter)
        .map(|((&r, &t), &v)| (r - v).abs().powf(p) - (t - v).abs().powf(p))
        .collect()
}

/// Weighted L_p distance between voter `j` and candidate `i` under weight
/// vector `w`: `(sum_k w_k |c_{i,k} - v_{j,k}|^p)^{1/p}`.
pub fn weighted_distance(inst: &ElectionInstance, j: usize, i: usize, w: &[f64]) -> Result<f64> {
    if j >= inst.num_voters() {
        return Err(Error::IndexOutOfRange(format!("voter {j}")));
    }
    if i >= inst.num_candidates() {
        return Err(Error::IndexOutOfRange(format!("candidate {i}")));
    }
    if w.len() != inst.num_issues() {
        return Err(Error::Dimension(format!(
            "weight vector has {} entries, expected {}",
            w.len(),
            inst.num_issues()
        )));
    }
    check_simplex(w)?;
    Ok(distance_power(inst, j, i, w).powf(1.0 / inst.p()))
}

/// `d_{i,j}^p`, the p-th power of the weighted distance. Used for all
/// comparisons to avoid root-extraction noise.
fn distance_power(inst: &ElectionInstance, j: usize, i: usize, w: &[f64]) -> f64 {
    let c = &inst.candidates()[i];
    let v = &inst.voters()[j];
    let p = inst.p();
    w.iter()
        .zip(c.iter().zip(v))
        .map(|(&wk, (&ck, &vk))| wk * (ck - vk).abs().powf(p))
        .sum()
}

/// Result of a deterministic plurality tally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    /// Vote count per candidate.
    pub votes: Vec<usize>,
    /// Chosen candidate per voter.
    pub chosen: Vec<usize>,
}

/// Tally the election at weight vector `w`. Each voter votes for the
/// minimum-distance candidate; among candidates within [`TIE_TOL`] (on the
/// p-th-power scale) of the minimum, the lowest index wins.
pub fn deterministic_tally(inst: &ElectionInstance, w: &[f64]) -> Result<Tally> {
    if w.len() != inst.num_issues() {
        return Err(Error::Dimension(format!(
            "weight vector has {} entries, expected {}",
            w.len(),
            inst.num_issues()
        )));
    }
    check_simplex(w)?;
    let m = inst.num_candidates();
    let mut votes = vec![0usize; m];
    let mut chosen = Vec::with_capacity(inst.num_voters());
    for j in 0..inst.num_voters() {
        let mut best = 0usize;
        let mut best_d = distance_power(inst, j, 0, w);
        for i in 1..m {
            let d = distance_power(inst, j, i, w);
            if d < best_d - TIE_TOL {
                best = i;
                best_d = d;
            }
        }
        votes[best] += 1;
        chosen.push(best);
    }
    Ok(Tally { votes, chosen })
}

/// Plurality winner of a tally; ties resolve toward the lowest index, so
/// candidate 0 wins whenever its tally ties the maximum.
pub fn plurality_outcome(tally: &Tally) -> usize {
    let mut winner = 0usize;
    for (i, &v) in tally.votes.iter().enumerate() {
        if v > tally.votes[winner] {
            winner = i;
        }
    }
    winner
}

/// Probability model for stochastic voting, mapping a voter's weighted
/// preference inner products to the probability of voting for candidate 0.
#[derive(Debug, Clone, PartialEq)]
pub enum StochasticModel {
    /// `f(v_j, c_0) = gamma0 + sum_{i >= 1} gamma[i-1] * <w, a_j^{(i)}>`.
    /// Solver paths operate on this unclamped affine form; values are only
    /// clamped at reporting boundaries.
    Linear { gamma0: f64, gamma: Vec<f64> },
    /// `f(v_j, c_0) = 1 / (1 + exp(-alpha * <w, a_j>))`, two candidates only.
    Sigmoid { alpha: f64 },
}

impl StochasticModel {
    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            StochasticModel::Linear { gamma, .. } => {
                if gamma.len() != m - 1 {
                    return Err(Error::Dimension(format!(
                        "gamma has {} entries for {} rivals",
                        gamma.len(),
                        m - 1
                    )));
                }
                Ok(())
            }
            StochasticModel::Sigmoid { alpha } => {
                if !(*alpha > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "sigmoid sharpness must be positive, got {alpha}"
                    )));
                }
                if m != 2 {
                    return Err(Error::InvalidParameter(
                        "sigmoid model is defined for two candidates".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Default linear preset for two candidates: `gamma0 = 0.5`,
    /// `gamma = 0.5 / A` with `A = max_j ||a_j||_1`, which keeps values in
    /// `[0, 1]` for every simplex weight vector.
    pub fn default_linear(inst: &ElectionInstance) -> Result<Self> {
        if inst.num_candidates() != 2 {
            return Err(Error::InvalidParameter(
                "default linear preset is defined for two candidates".into(),
            ));
        }
        let tensor = preference_tensor(inst);
        let a_max = (0..inst.num_voters())
            .map(|j| tensor.rival(j, 1).iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        let gamma = if a_max > 0.0 { 0.5 / a_max } else { 0.0 };
        Ok(StochasticModel::Linear { gamma0: 0.5, gamma: vec![gamma] })
    }
}

/// Expected number of votes for candidate 0, with a warning flag raised when
/// a linear model's unclamped values leave `[0, 1]` by more than [`PROB_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedVotes {
    pub value: f64,
    pub range_warning: bool,
}

/// Sum of per-voter vote probabilities for candidate 0 at weight vector `w`.
pub fn expected_votes(
    inst: &ElectionInstance,
    w: &[f64],
    model: &StochasticModel,
) -> Result<ExpectedVotes> {
    if w.len() != inst.num_issues() {
        return Err(Error::Dimension(format!(
            "weight vector has {} entries, expected {}",
            w.len(),
            inst.num_issues()
        )));
    }
    check_simplex(w)?;
    model.validate(inst.num_candidates())?;
    let tensor = preference_tensor(inst);
    let mut total = 0.0;
    let mut warning = false;
    for j in 0..inst.num_voters() {
        let f = match model {
            StochasticModel::Linear { gamma0, gamma } => {
                let mut f = *gamma0;
                for (r, g) in gamma.iter().enumerate() {
                    f += g * dot(w, tensor.rival(j, r + 1));
                }
                if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&f) {
                    warning = true;
                }
                f
            }
            StochasticModel::Sigmoid { alpha } => {
                let t = dot(w, tensor.rival(j, 1));
                1.0 / (1.0 + (-alpha * t).exp())
            }
        };
        total += f;
    }
    Ok(ExpectedVotes { value: total, range_warning: warning })
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `||x||_p` with the usual conventions for `p = 1` and `p = infinity`.
pub fn pnorm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else if (p - 1.0).abs() < 1e-12 {
        x.iter().map(|v| v.abs()).sum()
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}
