//! Instance and solution file handling: a versioned JSON schema for
//! elections, attack constraints, and stochastic models, plus
//! self-contained solution files that can be re-certified without any
//! solver state.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    deterministic_tally, expected_votes, plurality_outcome, pnorm, AttackConstraint,
    Budget, ElectionInstance, StochasticModel,
};

pub const SCHEMA_VERSION: u32 = 1;

/// A parsed instance document: the election, the attack constraint, and an
/// optional stochastic voting model.
#[derive(Debug, Clone)]
pub struct InstanceBundle {
    pub instance: ElectionInstance,
    pub constraint: AttackConstraint,
    pub stochastic: Option<StochasticModel>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BudgetField {
    Number(f64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum ConstraintDoc {
    #[serde(rename = "budget")]
    Budget {
        p: f64,
        #[serde(rename = "B")]
        b: BudgetField,
    },
    #[serde(rename = "interval")]
    Interval { intervals: Vec<(f64, f64)> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum StochasticDoc {
    #[serde(rename = "linear")]
    Linear { gamma0: f64, gamma: Vec<f64> },
    #[serde(rename = "sigmoid")]
    Sigmoid { alpha: f64 },
}

#[derive(Serialize, Deserialize)]
struct MetadataDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    voter_labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    schema_version: u32,
    p: f64,
    candidates: Vec<Vec<f64>>,
    voters: Vec<Vec<f64>>,
    weights: Vec<f64>,
    constraint: ConstraintDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    stochastic: Option<StochasticDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metadata: Option<MetadataDoc>,
}

/// Parse and validate an instance document. Malformed JSON and schema-level
/// problems surface as schema errors (with serde's line/column
/// diagnostics); semantic violations surface as the model's own simplex /
/// dimension / parameter errors.
pub fn parse_instance(text: &str) -> Result<InstanceBundle> {
    let doc: InstanceDoc =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported schema_version {}, expected {}",
            doc.schema_version, SCHEMA_VERSION
        )));
    }
    let constraint = match &doc.constraint {
        ConstraintDoc::Budget { p, b } => {
            let budget = match b {
                BudgetField::Number(v) => {
                    if !v.is_finite() {
                        Budget::Unbounded
                    } else {
                        Budget::Finite(*v)
                    }
                }
                BudgetField::Word(word) if word == "unbounded" => Budget::Unbounded,
                BudgetField::Word(word) => {
                    return Err(Error::Schema(format!(
                        "constraint B must be a number or \"unbounded\", got \"{word}\""
                    )))
                }
            };
            AttackConstraint::NormBudget { p_norm: *p, budget }
        }
        ConstraintDoc::Interval { intervals } => {
            for (lo, hi) in intervals {
                if !(lo <= hi) {
                    return Err(Error::Schema(format!(
                        "interval [{lo}, {hi}] has lower bound above upper bound"
                    )));
                }
            }
            AttackConstraint::IntervalBox { intervals: intervals.clone() }
        }
    };
    let labels = doc.metadata.and_then(|m| m.voter_labels);
    let instance =
        ElectionInstance::with_labels(doc.candidates, doc.voters, doc.weights, doc.p, labels)?;
    constraint.validate(instance.num_issues())?;
    let stochastic = match doc.stochastic {
        None => None,
        Some(StochasticDoc::Linear { gamma0, gamma }) => {
            let model = StochasticModel::Linear { gamma0, gamma };
            model.validate(instance.num_candidates())?;
            Some(model)
        }
        Some(StochasticDoc::Sigmoid { alpha }) => {
            let model = StochasticModel::Sigmoid { alpha };
            model.validate(instance.num_candidates())?;
            Some(model)
        }
    };
    Ok(InstanceBundle { instance, constraint, stochastic })
}

/// Serialize a bundle into the canonical document form. Round-trip stable:
/// parsing the output reproduces an identical model.
pub fn serialize_instance(bundle: &InstanceBundle) -> String {
    let constraint = match &bundle.constraint {
        AttackConstraint::NormBudget { p_norm, budget } => ConstraintDoc::Budget {
            p: *p_norm,
            b: match budget {
                Budget::Finite(v) => BudgetField::Number(*v),
                Budget::Unbounded => BudgetField::Word("unbounded".into()),
            },
        },
        AttackConstraint::IntervalBox { intervals } => {
            ConstraintDoc::Interval { intervals: intervals.clone() }
        }
    };
    let stochastic = bundle.stochastic.as_ref().map(|model| match model {
        StochasticModel::Linear { gamma0, gamma } => {
            StochasticDoc::Linear { gamma0: *gamma0, gamma: gamma.clone() }
        }
        StochasticModel::Sigmoid { alpha } => StochasticDoc::Sigmoid { alpha: *alpha },
    });
    let metadata = bundle.instance.voter_labels().map(|labels| MetadataDoc {
        voter_labels: Some(labels.to_vec()),
    });
    let doc = InstanceDoc {
        schema_version: SCHEMA_VERSION,
        p: bundle.instance.p(),
        candidates: bundle.instance.candidates().to_vec(),
        voters: bundle.instance.voters().to_vec(),
        weights: bundle.instance.weights().to_vec(),
        constraint,
        stochastic,
        metadata,
    };
    serde_json::to_string_pretty(&doc).expect("instance documents always serialize")
}

/// Hex SHA-256 of a document's bytes, used to tie solutions to instances.
pub fn instance_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// What a solution file claims to optimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    #[serde(rename = "max-support")]
    MaxSupport,
    #[serde(rename = "majority")]
    Majority,
    #[serde(rename = "expected-votes")]
    ExpectedVotes,
}

/// Self-contained solution record: everything `verify` needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub instance_sha256: String,
    pub objective_kind: ObjectiveKind,
    pub objective_value: f64,
    pub x: Vec<f64>,
    pub constraint_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

pub fn serialize_solution(sol: &SolutionFile) -> String {
    serde_json::to_string_pretty(sol).expect("solution documents always serialize")
}

pub fn parse_solution(text: &str) -> Result<SolutionFile> {
    let sol: SolutionFile =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if sol.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported schema_version {}, expected {}",
            sol.schema_version, SCHEMA_VERSION
        )));
    }
    Ok(sol)
}

/// Violation of the constraint (and the weight box) by perturbation `x`,
/// as a single nonnegative slack number.
pub fn constraint_slack(
    constraint: &AttackConstraint,
    weights: &[f64],
    x: &[f64],
) -> f64 {
    let mut slack: f64 = 0.0;
    let sum: f64 = x.iter().sum();
    slack = slack.max(sum.abs()); // w + x must stay on the simplex
    for (w, xi) in weights.iter().zip(x) {
        let v = w + xi;
        slack = slack.max(-v).max(v - 1.0);
    }
    match constraint {
        AttackConstraint::NormBudget { p_norm, budget } => match budget {
            Budget::Finite(b) => slack.max(pnorm(x, *p_norm) - b),
            Budget::Unbounded => slack,
        },
        AttackConstraint::IntervalBox { intervals } => {
            let mut s = slack;
            for ((lo, hi), (w, xi)) in intervals.iter().zip(weights.iter().zip(x)) {
                let v = w + xi;
                s = s.max(lo - v).max(v - hi);
            }
            s
        }
    }
}

/// Re-certify a solution against its instance document: hash binding,
/// constraint slack within `eps`, and the claimed objective reproduced by
/// an independent re-tally / re-evaluation.
pub fn verify_solution(
    instance_text: &str,
    bundle: &InstanceBundle,
    sol: &SolutionFile,
    eps: f64,
) -> Result<()> {
    let hash = instance_hash(instance_text);
    if hash != sol.instance_sha256 {
        return Err(Error::Verification(format!(
            "instance hash mismatch: document {hash}, solution {}",
            sol.instance_sha256
        )));
    }
    let inst = &bundle.instance;
    if sol.x.len() != inst.num_issues() {
        return Err(Error::Verification(format!(
            "perturbation has {} entries, instance has {} issues",
            sol.x.len(),
            inst.num_issues()
        )));
    }
    let slack = constraint_slack(&bundle.constraint, inst.weights(), &sol.x);
    if slack > eps {
        return Err(Error::Verification(format!(
            "constraint slack {slack:e} exceeds eps {eps:e}"
        )));
    }
    let perturbed: Vec<f64> =
        inst.weights().iter().zip(&sol.x).map(|(w, xi)| w + xi).collect();
    match sol.objective_kind {
        ObjectiveKind::MaxSupport => {
            let tally = deterministic_tally(inst, &perturbed)?;
            let votes = tally.votes[0] as f64;
            if votes != sol.objective_value {
                return Err(Error::Verification(format!(
                    "re-tally gives {votes} votes for candidate 0, solution claims {}",
                    sol.objective_value
                )));
            }
        }
        ObjectiveKind::Majority => {
            let tally = deterministic_tally(inst, &perturbed)?;
            let votes = tally.votes[0] as f64;
            if votes != sol.objective_value {
                return Err(Error::Verification(format!(
                    "re-tally gives {votes} votes for candidate 0, solution claims {}",
                    sol.objective_value
                )));
            }
            // Only a strict "win" claim promises that the re-tally confirms
            // candidate 0; "win-with-eps-slack" certifies the win only up
            // to the solver's numerical slack.
            let claims_win = sol.verdict.as_deref() == Some("win");
            let is_winner = plurality_outcome(&tally) == 0
                || tally.votes.iter().all(|&v| v <= tally.votes[0]);
            if claims_win && !is_winner {
                return Err(Error::Verification(
                    "solution claims a plurality win but re-tally disagrees".into(),
                ));
            }
        }
        ObjectiveKind::ExpectedVotes => {
            let model = bundle.stochastic.as_ref().ok_or_else(|| {
                Error::Verification(
                    "expected-votes solution but instance has no stochastic model".into(),
                )
            })?;
            let ev = expected_votes(inst, &perturbed, model)?.value;
            if (ev - sol.objective_value).abs() > 1e-6 {
                return Err(Error::Verification(format!(
                    "re-evaluation gives expected votes {ev}, solution claims {}",
                    sol.objective_value
                )));
            }
        }
    }
    Ok(())
}
