//! `ectl`: command-line driver for the election-control solvers, gadget
//! generators, and certification oracles.
//!
//! Exit codes: 0 success; 2 parse/validation error; 3 enumeration cap
//! exceeded; 4 no winning attack (majority NoWin); 5 verification failure;
//! 1 any other failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use election_control::error::Error;
use election_control::gadgets::{
    build_max2sat_gadget, build_tcwms_gadget, build_tcwp_gadget, build_theta_l_gadget,
    GadgetSizing, Literal, Max2SatFormula, TcmsInstance,
};
use election_control::io::{
    constraint_slack, instance_hash, parse_instance, parse_solution, serialize_instance,
    serialize_solution, verify_solution, InstanceBundle, ObjectiveKind, SolutionFile,
    SCHEMA_VERSION,
};
use election_control::model::{
    AttackConstraint, Budget, ElectionInstance, StochasticModel,
};
use election_control::oracles::{
    grid_search, projected_gradient_oracle, structured_weight_search, Objective,
};
use election_control::solvers::{
    majority_control, max_support, stochastic_linear_max, AttackSolution, MajorityVerdict,
};

#[derive(Parser)]
#[command(name = "ectl", version, about = "Election-control attack solvers")]
struct Cli {
    /// Size of the global worker pool for parallel scans.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// RNG seed for randomized generators.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance document to solve.
    #[arg(long)]
    instance: PathBuf,
    /// Numerical tolerance for constraint slack and iterative solves.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Where to write the solution file (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SizingArg {
    /// Copy counts as stated per forcing block.
    Large,
    /// Halved duplication; winnable forcing blocks total 8l'^2n' + 13l'n'.
    Balanced,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the number of voters choosing candidate 0.
    MaxSupport(SolveArgs),
    /// Make candidate 0 a plurality winner with minimal perturbation.
    Majority(SolveArgs),
    /// Maximize expected votes under the instance's stochastic model.
    Stochastic(SolveArgs),
    /// Generate a hardness-gadget instance.
    Gadget {
        #[command(subcommand)]
        kind: GadgetCommand,
    },
    /// Run a brute-force certification oracle.
    Oracle {
        #[command(subcommand)]
        kind: OracleCommand,
    },
    /// Re-certify a solution file against its instance.
    Verify {
        /// Solution file to check.
        solution: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
    },
    /// Solve instances and emit one CSV row each.
    Bench {
        /// Instance documents (repeatable).
        #[arg(long, required = true)]
        instance: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TcmsArgs {
    /// Number of embedded source voters.
    #[arg(long)]
    nprime: usize,
    /// Number of source issues.
    #[arg(long)]
    ellprime: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// Weighted max-support gadget over 2l' + 2 issues.
    Tcwms {
        #[command(flatten)]
        common: TcmsArgs,
        #[arg(long, value_enum, default_value_t = SizingArg::Large)]
        sizing: SizingArg,
    },
    /// Plurality variant with the extra all-zeros block.
    Tcwp {
        #[command(flatten)]
        common: TcmsArgs,
        #[arg(long, value_enum, default_value_t = SizingArg::Large)]
        sizing: SizingArg,
    },
    /// Sparse-tier gadget over n'^2 l'^2 issues.
    ThetaL {
        #[command(flatten)]
        common: TcmsArgs,
    },
    /// Sigmoid clause gadget for a random 2-CNF formula.
    Max2sat {
        /// Number of Boolean variables.
        #[arg(long)]
        vars: usize,
        /// Number of clauses.
        #[arg(long)]
        clauses: usize,
        /// Sigmoid sharpness (defaults to the clause count).
        #[arg(long)]
        alpha: Option<f64>,
        /// Per-variable block coefficient 1 (defaults to the clause count).
        #[arg(long)]
        beta1: Option<f64>,
        /// Per-variable block coefficient 2 (defaults to the clause count).
        #[arg(long)]
        beta2: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exact simplex-grid scan.
    Grid {
        #[arg(long)]
        instance: PathBuf,
        /// Grid step as a real (e.g. 0.005) or subdivision count (e.g. 200).
        #[arg(long, default_value_t = 16.0)]
        resolution: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Scan over binary-structured weight vectors.
    Structured {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Projected-gradient check for the linear stochastic objective.
    Pgd {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Schema(_)
        | Error::Simplex(_)
        | Error::Dimension(_)
        | Error::InvalidParameter(_)
        | Error::IndexOutOfRange(_)
        | Error::UnassignedVoter(_) => 2,
        Error::EnumerationCapExceeded(_) => 3,
        Error::Verification(_) => 5,
        Error::NonConvergence(_) => 1,
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Schema(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_to_string(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))
}

fn load_bundle(path: &PathBuf) -> Result<(String, InstanceBundle), Error> {
    let text = read_to_string(path)?;
    let bundle = parse_instance(&text)?;
    Ok((text, bundle))
}

fn verdict_string(v: &MajorityVerdict) -> &'static str {
    match v {
        MajorityVerdict::Win => "win",
        MajorityVerdict::WinWithEpsSlack => "win-with-eps-slack",
        MajorityVerdict::NoWin => "no-win",
    }
}

fn solution_file(
    instance_text: &str,
    bundle: &InstanceBundle,
    kind: ObjectiveKind,
    objective_value: f64,
    sol: &AttackSolution,
) -> SolutionFile {
    SolutionFile {
        schema_version: SCHEMA_VERSION,
        instance_sha256: instance_hash(instance_text),
        objective_kind: kind,
        objective_value,
        x: sol.x.clone(),
        constraint_slack: constraint_slack(
            &bundle.constraint,
            bundle.instance.weights(),
            &sol.x,
        ),
        verdict: sol.verdict.as_ref().map(|v| verdict_string(v).to_string()),
    }
}

fn render_solution(file: &SolutionFile, format: Format) -> String {
    match format {
        Format::Json => serialize_solution(file),
        Format::Csv => {
            let xs: Vec<String> = file.x.iter().map(|v| format!("{v}")).collect();
            format!(
                "objective_kind,objective_value,constraint_slack,verdict,x\n{},{},{},{},{}",
                match file.objective_kind {
                    ObjectiveKind::MaxSupport => "max-support",
                    ObjectiveKind::Majority => "majority",
                    ObjectiveKind::ExpectedVotes => "expected-votes",
                },
                file.objective_value,
                file.constraint_slack,
                file.verdict.as_deref().unwrap_or(""),
                xs.join(";")
            )
        }
    }
}

fn full_box_constraint(ell: usize) -> AttackConstraint {
    AttackConstraint::IntervalBox { intervals: vec![(0.0, 1.0); ell] }
}

fn gadget_bundle(
    instance: ElectionInstance,
    stochastic: Option<StochasticModel>,
) -> InstanceBundle {
    let ell = instance.num_issues();
    InstanceBundle { instance, constraint: full_box_constraint(ell), stochastic }
}

/// Deterministic source voters for the reduction gadgets: all-ones, so the
/// embedded optimum is n' (every selection wins every source voter).
fn default_source(nprime: usize, ellprime: usize, seed: Option<u64>) -> Result<TcmsInstance, Error> {
    let voters: Vec<Vec<f64>> = match seed {
        None => vec![vec![1.0; ellprime]; nprime],
        Some(seed) => {
            // Simple deterministic bit mixer so gadget generation needs no
            // RNG dependency; splitmix64 constants.
            let mut state = seed;
            let mut next = move || {
                state = state.wrapping_add(0x9e3779b97f4a7c15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
                z ^ (z >> 31)
            };
            (0..nprime)
                .map(|_| {
                    (0..ellprime)
                        .map(|_| if next() & 1 == 1 { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect()
        }
    };
    TcmsInstance::new(voters)
}

fn random_formula(vars: usize, clauses: usize, seed: u64) -> Result<Max2SatFormula, Error> {
    if vars < 2 {
        return Err(Error::InvalidParameter(
            "clause gadget needs at least 2 variables".into(),
        ));
    }
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    let clause_list: Vec<(Literal, Literal)> = (0..clauses)
        .map(|_| {
            let a = (next() % vars as u64) as usize;
            let mut b = (next() % (vars as u64 - 1)) as usize;
            if b >= a {
                b += 1;
            }
            (
                Literal { var: a, negated: next() & 1 == 1 },
                Literal { var: b, negated: next() & 1 == 1 },
            )
        })
        .collect();
    Max2SatFormula::new(vars, clause_list)
}

fn infer_objective(bundle: &InstanceBundle) -> Objective {
    match &bundle.stochastic {
        Some(model) => Objective::ExpectedVotes(model.clone()),
        None => Objective::MaxSupport,
    }
}

fn render_search(weights: &[f64], value: f64) -> String {
    serde_json::json!({ "value": value, "weights": weights }).to_string()
}

fn run(cli: Cli) -> Result<Option<u8>, Error> {
    match cli.command {
        Command::MaxSupport(args) => {
            let (text, bundle) = load_bundle(&args.instance)?;
            let sol = max_support(&bundle.instance, &bundle.constraint, args.epsilon)?;
            let votes = sol.votes_for_c1.expect("max-support reports a vote count");
            let file = solution_file(
                &text,
                &bundle,
                ObjectiveKind::MaxSupport,
                votes as f64,
                &sol,
            );
            emit(&args.output, &render_solution(&file, args.format))?;
            Ok(None)
        }
        Command::Majority(args) => {
            let (text, bundle) = load_bundle(&args.instance)?;
            let sol = majority_control(&bundle.instance, &bundle.constraint, args.epsilon)?;
            let votes = sol.votes_for_c1.expect("majority reports a vote count");
            let file = solution_file(
                &text,
                &bundle,
                ObjectiveKind::Majority,
                votes as f64,
                &sol,
            );
            emit(&args.output, &render_solution(&file, args.format))?;
            if matches!(sol.verdict, Some(MajorityVerdict::NoWin)) {
                return Ok(Some(4));
            }
            Ok(None)
        }
        Command::Stochastic(args) => {
            let (text, bundle) = load_bundle(&args.instance)?;
            let model = match &bundle.stochastic {
                Some(StochasticModel::Linear { .. }) => bundle.stochastic.clone().unwrap(),
                Some(StochasticModel::Sigmoid { .. }) => {
                    return Err(Error::InvalidParameter(
                        "no exact solver for the sigmoid model; use `oracle grid` or `oracle structured`"
                            .into(),
                    ))
                }
                None => {
                    return Err(Error::InvalidParameter(
                        "instance has no stochastic model".into(),
                    ))
                }
            };
            let sol = stochastic_linear_max(
                &bundle.instance,
                &model,
                &bundle.constraint,
                args.epsilon,
            )?;
            let value = sol.expected_votes.expect("stochastic reports expected votes");
            let file = solution_file(
                &text,
                &bundle,
                ObjectiveKind::ExpectedVotes,
                value,
                &sol,
            );
            emit(&args.output, &render_solution(&file, args.format))?;
            Ok(None)
        }
        Command::Gadget { kind } => {
            match kind {
                GadgetCommand::Tcwms { common, sizing } => {
                    let t = default_source(common.nprime, common.ellprime, cli.seed)?;
                    let sizing = match sizing {
                        SizingArg::Large => GadgetSizing::Large,
                        SizingArg::Balanced => GadgetSizing::Balanced,
                    };
                    let inst = build_tcwms_gadget(&t, sizing)?;
                    emit(&common.output, &serialize_instance(&gadget_bundle(inst, None)))?;
                }
                GadgetCommand::Tcwp { common, sizing } => {
                    let t = default_source(common.nprime, common.ellprime, cli.seed)?;
                    let sizing = match sizing {
                        SizingArg::Large => GadgetSizing::Large,
                        SizingArg::Balanced => GadgetSizing::Balanced,
                    };
                    let inst = build_tcwp_gadget(&t, sizing)?;
                    emit(&common.output, &serialize_instance(&gadget_bundle(inst, None)))?;
                }
                GadgetCommand::ThetaL { common } => {
                    let t = default_source(common.nprime, common.ellprime, cli.seed)?;
                    let inst = build_theta_l_gadget(&t)?;
                    emit(&common.output, &serialize_instance(&gadget_bundle(inst, None)))?;
                }
                GadgetCommand::Max2sat { vars, clauses, alpha, beta1, beta2, output } => {
                    let n = clauses as f64;
                    let phi = random_formula(vars, clauses, cli.seed.unwrap_or(0))?;
                    let g = build_max2sat_gadget(
                        &phi,
                        beta1.unwrap_or(n),
                        beta2.unwrap_or(n),
                        alpha.unwrap_or(n),
                    )?;
                    let bundle = gadget_bundle(g.instance, Some(g.model));
                    emit(&output, &serialize_instance(&bundle))?;
                }
            }
            Ok(None)
        }
        Command::Oracle { kind } => {
            match kind {
                OracleCommand::Grid { instance, resolution, output } => {
                    let (_, bundle) = load_bundle(&instance)?;
                    if !(resolution.is_finite() && resolution > 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "resolution must be positive, got {resolution}"
                        )));
                    }
                    let subdivisions = if resolution < 1.0 {
                        (1.0 / resolution).round() as u32
                    } else {
                        resolution.round() as u32
                    };
                    let objective = infer_objective(&bundle);
                    let res = grid_search(
                        &bundle.instance,
                        &bundle.constraint,
                        &objective,
                        subdivisions,
                    )?;
                    emit(&output, &render_search(&res.weights, res.value))?;
                }
                OracleCommand::Structured { instance, output } => {
                    let (_, bundle) = load_bundle(&instance)?;
                    let objective = infer_objective(&bundle);
                    let res = structured_weight_search(&bundle.instance, &objective)?;
                    emit(&output, &render_search(&res.weights, res.value))?;
                }
                OracleCommand::Pgd { instance, output } => {
                    let (_, bundle) = load_bundle(&instance)?;
                    let model = bundle.stochastic.clone().ok_or_else(|| {
                        Error::InvalidParameter("instance has no stochastic model".into())
                    })?;
                    let (p_norm, budget) = match &bundle.constraint {
                        AttackConstraint::NormBudget {
                            p_norm,
                            budget: Budget::Finite(b),
                        } => (*p_norm, *b),
                        _ => {
                            return Err(Error::InvalidParameter(
                                "gradient oracle needs a finite norm budget".into(),
                            ))
                        }
                    };
                    let (x, value) =
                        projected_gradient_oracle(&bundle.instance, &model, p_norm, budget)?;
                    emit(&output, &render_search(&x, value))?;
                }
            }
            Ok(None)
        }
        Command::Verify { solution, instance, epsilon } => {
            let (text, bundle) = load_bundle(&instance)?;
            let sol = parse_solution(&read_to_string(&solution)?)?;
            verify_solution(&text, &bundle, &sol, epsilon)?;
            println!("verified: objective {} with slack <= {epsilon:e}", sol.objective_value);
            Ok(None)
        }
        Command::Bench { instance, epsilon, output } => {
            let mut rows =
                vec!["instance,n,ell,m,p,constraint,objective,wall_time_ms".to_string()];
            for path in &instance {
                let (_, bundle) = load_bundle(&path.clone())?;
                let inst = &bundle.instance;
                let constraint_desc = match &bundle.constraint {
                    AttackConstraint::NormBudget { p_norm, budget } => match budget {
                        Budget::Finite(b) => format!("budget(p={p_norm};B={b})"),
                        Budget::Unbounded => format!("budget(p={p_norm};B=unbounded)"),
                    },
                    AttackConstraint::IntervalBox { .. } => "interval".to_string(),
                };
                let start = Instant::now();
                let objective = match &bundle.stochastic {
                    Some(model @ StochasticModel::Linear { .. }) => {
                        stochastic_linear_max(inst, model, &bundle.constraint, epsilon)?
                            .expected_votes
                            .unwrap_or(f64::NAN)
                    }
                    _ => max_support(inst, &bundle.constraint, epsilon)?
                        .votes_for_c1
                        .map(|v| v as f64)
                        .unwrap_or(f64::NAN),
                };
                let ms = start.elapsed().as_secs_f64() * 1000.0;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                rows.push(format!(
                    "{id},{},{},{},{},{constraint_desc},{objective},{ms:.3}",
                    inst.num_voters(),
                    inst.num_issues(),
                    inst.num_candidates(),
                    inst.p(),
                ));
            }
            emit(&output, &rows.join("\n"))?;
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(code)) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
