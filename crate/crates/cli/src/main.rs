//! `wbp` — solve, generate, verify, and cross-check weight-balanced
//! partitioning instances from the command line.
//!
//! Exit codes: 0 success, 2 infeasible, 3 resource cap exceeded, 4 bad
//! input, 5 internal invariant failure. Timings go to stderr; reports are
//! deterministic given input and flags.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use wbp_core::augment::{solve_linear, AugmentError};
use wbp_core::brute::{BruteConfig, BruteError};
use wbp_core::convex::{solve_convex, ConvexError, InnerNorm, ObjectiveSpec, OuterNorm};
use wbp_core::fileio::{self, FileError, SolutionReport, TraceSummary};
use wbp_core::graver::GraverError;
use wbp_core::land::{
    approximation_factor, brute_f1_optimum, brute_f2_optimum, brute_f3_optimum, consolidate,
    evaluate_f1, evaluate_f2, evaluate_f3, farmer_reports, generate_instance, to_instance,
    ConsolidationError, GenerateConfig, GenerateError, LandBruteError, LandError, LandInstance,
    LandObjective,
};
use wbp_core::model::Partition;
use wbp_core::nfold::{BuildError, EncodeError, NFoldSystem};
use wbp_core::num::{format_rational, parse_rational};
use wbp_core::SolveContext;

#[derive(Parser)]
#[command(name = "wbp", version, about = "Weight-balanced partitioning solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance and write a solution report.
    Solve(SolveArgs),
    /// Generate a random village instance.
    Generate(GenerateArgs),
    /// Re-check a solution report against its instance.
    Verify(VerifyArgs),
    /// Brute-force optimum for cross-checking (small instances only).
    Oracle(OracleArgs),
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Constraint model: p1 exact totals, p2 bounded single feature,
    /// p3 bounded feature vectors.
    #[arg(long, value_enum, default_value_t = ModelArg::P3)]
    model: ModelArg,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::F3)]
    objective: ObjectiveArg,
    /// Include per-step augmentation detail in the report.
    #[arg(long)]
    trace: bool,
    /// Report path; defaults to the instance path with extension `report.json`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for the convex probe sweep.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    P1,
    P2,
    P3,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    /// Minimize size-weighted squared farmstead distances.
    F1,
    /// Minimize distances normalized by original holdings; carries an
    /// approximation certificate for the per-hectare objective.
    F3,
    /// Maximize the plain utility sum (the negated f1 cost).
    Linear,
    /// Maximize the composed-norm clustering objective over cluster sums.
    ClusteringBody,
}

impl ObjectiveArg {
    fn name(self) -> &'static str {
        match self {
            ObjectiveArg::F1 => "f1",
            ObjectiveArg::F3 => "f3",
            ObjectiveArg::Linear => "linear",
            ObjectiveArg::ClusteringBody => "clustering-body",
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    lots: usize,
    #[arg(long)]
    farmers: usize,
    #[arg(long, default_value_t = 2)]
    features: usize,
    /// Number of distinct lot categories.
    #[arg(long, default_value_t = 3)]
    omega: usize,
    /// Tolerance on every feature total, e.g. `3/100` or `0.03`.
    #[arg(long, default_value = "3/100")]
    deviation: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    report: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = OracleObjective::F3)]
    objective: OracleObjective,
    /// Refuse instances whose partition space exceeds this many points.
    #[arg(long, default_value_t = 2_000_000)]
    max_space: u128,
}

#[derive(Copy, Clone, ValueEnum)]
enum OracleObjective {
    F1,
    F2,
    F3,
}

/// A failed run, already classified into an exit code.
enum Failure {
    Input(String),
    Infeasible(String),
    Cap(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Infeasible(_) => 2,
            Failure::Cap(_) => 3,
            Failure::Input(_) => 4,
            Failure::Internal(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m)
            | Failure::Infeasible(m)
            | Failure::Cap(m)
            | Failure::Internal(m) => m,
        }
    }
}

fn classify_land(e: LandError) -> Failure {
    match e {
        LandError::OriginalInfeasible { .. }
        | LandError::InvertedBounds { .. }
        | LandError::ZeroKappa { .. } => Failure::Infeasible(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Land(inner) => classify_land(inner),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<ConsolidationError> for Failure {
    fn from(e: ConsolidationError) -> Self {
        match e {
            ConsolidationError::Land(inner) => classify_land(inner),
            ConsolidationError::Build(inner) => Failure::Input(inner.to_string()),
            ConsolidationError::Encode(EncodeError::Infeasible { .. }) => {
                Failure::Infeasible(e.to_string())
            }
            ConsolidationError::Encode(_) => Failure::Internal(e.to_string()),
            ConsolidationError::Graver(_) => Failure::Cap(e.to_string()),
            ConsolidationError::Augment(AugmentError::StepCapExceeded { .. }) => {
                Failure::Cap(e.to_string())
            }
            ConsolidationError::Augment(_) => Failure::Internal(e.to_string()),
        }
    }
}

impl From<GraverError> for Failure {
    fn from(e: GraverError) -> Self {
        Failure::Cap(e.to_string())
    }
}

impl From<AugmentError> for Failure {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::StepCapExceeded { .. } => Failure::Cap(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<ConvexError> for Failure {
    fn from(e: ConvexError) -> Self {
        match e {
            ConvexError::DimensionTooLarge { .. } | ConvexError::TooManyHyperplanes { .. } => {
                Failure::Cap(e.to_string())
            }
            ConvexError::Augment(inner) => inner.into(),
            ConvexError::WeightLength { .. } => Failure::Internal(e.to_string()),
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<EncodeError> for Failure {
    fn from(e: EncodeError) -> Self {
        match e {
            EncodeError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            EncodeError::Model(_) => Failure::Internal(e.to_string()),
        }
    }
}

impl From<LandError> for Failure {
    fn from(e: LandError) -> Self {
        classify_land(e)
    }
}

impl From<LandBruteError> for Failure {
    fn from(e: LandBruteError) -> Self {
        match e {
            LandBruteError::Land(inner) => classify_land(inner),
            LandBruteError::Brute(BruteError::SpaceTooLarge { .. }) => Failure::Cap(e.to_string()),
        }
    }
}

impl From<GenerateError> for Failure {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::Construction(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, anything else is a
            // usage error with our documented exit code.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(4);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    if args.threads == 0 {
        return Err(Failure::Input("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build_global()
        .map_err(|e| Failure::Input(format!("thread pool: {e}")))?;

    let li = fileio::read_instance(&args.instance)?;
    let ctx = SolveContext::new();
    let t0 = Instant::now();
    let report = match (args.model, args.objective) {
        (ModelArg::P3, ObjectiveArg::F1) => {
            SolutionReport::from_outcome(&consolidate(&li, LandObjective::F1, &ctx)?, args.trace)
        }
        (ModelArg::P3, ObjectiveArg::F3) => {
            SolutionReport::from_outcome(&consolidate(&li, LandObjective::F3, &ctx)?, args.trace)
        }
        _ => solve_custom(&li, args.model, args.objective, args.trace, &ctx)?,
    };
    eprintln!("timing: solve {:.1?}", t0.elapsed());

    let out_path = args
        .output
        .unwrap_or_else(|| args.instance.with_extension("report.json"));
    fileio::write_report(&out_path, &report)?;
    print_summary(&report, &out_path);
    Ok(())
}

/// Solve paths outside the default pipeline: alternative constraint models
/// and the raw linear / clustering-body objectives.
fn solve_custom(
    li: &LandInstance,
    model: ModelArg,
    objective: ObjectiveArg,
    include_trace: bool,
    ctx: &SolveContext,
) -> Result<SolutionReport, Failure> {
    let land_obj = match objective {
        ObjectiveArg::F3 => LandObjective::F3,
        _ => LandObjective::F1,
    };
    let inst = to_instance(li, land_obj)?;
    let sys = match model {
        ModelArg::P1 => NFoldSystem::build_p1(&inst)?,
        ModelArg::P2 => NFoldSystem::build_p2(&inst)?,
        ModelArg::P3 => NFoldSystem::build_p3(&inst)?,
    };
    let x0 = sys.encode_assignment(&inst, li.original())?;
    let basis = ctx.basis_for(&sys)?;

    let (x, trace, solver_value) = match objective {
        ObjectiveArg::ClusteringBody => {
            let spec = ObjectiveSpec::clustering_body(InnerNorm::L2Squared, OuterNorm::L1, 1);
            let sol = solve_convex(&sys, &x0, &spec, &basis, &ctx.augment, &ctx.convex)?;
            let value = sol
                .value
                .ok_or_else(|| Failure::Internal("convex solve returned no value".into()))?;
            (sol.x, sol.trace, value)
        }
        _ => {
            let weights = vec![BigRational::one(); sys.objective_rows()];
            let sol = solve_linear(&sys, &x0, &weights, &basis, &ctx.augment)?;
            (sol.x, sol.trace, sol.value)
        }
    };
    let (partition, slacks) = sys
        .decode_solution(&x)
        .map_err(|e| Failure::Internal(format!("solution fails to decode: {e}")))?;

    let (value, factor) = match objective {
        ObjectiveArg::F1 => (evaluate_f1(li, &partition)?, None),
        ObjectiveArg::F3 => (evaluate_f3(li, &partition)?, Some(approximation_factor(li)?)),
        ObjectiveArg::Linear | ObjectiveArg::ClusteringBody => (solver_value, None),
    };
    Ok(SolutionReport {
        objective: objective.name().to_string(),
        value,
        assignment: partition.assignment().to_vec(),
        per_farmer: farmer_reports(li, &partition, &slacks)?,
        f2_value: evaluate_f2(li, &partition)?,
        approximation_factor: factor,
        trace_summary: TraceSummary {
            steps: trace.len(),
            start_objective: trace.start_objective.clone(),
            final_objective: trace.final_objective.clone(),
        },
        trace_steps: include_trace.then(|| fileio::trace_steps(&trace)),
    })
}

fn print_summary(rep: &SolutionReport, out_path: &Path) {
    println!("objective  {}", rep.objective);
    println!("value      {}", format_rational(&rep.value));
    println!("f2         {}", format_rational(&rep.f2_value));
    if let Some(f) = &rep.approximation_factor {
        println!("guarantee  f2 within {} of its optimum", format_rational(f));
    }
    println!("steps      {}", rep.trace_summary.steps);
    println!();
    print_farmer_table(rep);
    println!();
    println!("report written to {}", out_path.display());
}

fn print_farmer_table(rep: &SolutionReport) {
    let mut rows = vec![vec![
        "farmer".to_string(),
        "feature".to_string(),
        "total".to_string(),
        "lower".to_string(),
        "upper".to_string(),
        "slack+".to_string(),
        "slack-".to_string(),
    ]];
    for (i, f) in rep.per_farmer.iter().enumerate() {
        for k in 0..f.totals.len() {
            let slack = |v: &Vec<BigInt>| {
                v.get(k).map_or_else(|| "-".to_string(), |s| s.to_string())
            };
            rows.push(vec![
                i.to_string(),
                k.to_string(),
                f.totals[k].to_string(),
                f.lower[k].to_string(),
                f.upper[k].to_string(),
                slack(&f.slack_plus),
                slack(&f.slack_minus),
            ]);
        }
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        println!("{}", line.join("  "));
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let deviation = parse_rational(&args.deviation)
        .map_err(|e| Failure::Input(format!("--deviation: {e}")))?;
    let li = generate_instance(&GenerateConfig {
        seed: args.seed,
        lots: args.lots,
        farmers: args.farmers,
        features: args.features,
        omega_size: args.omega,
        deviation,
    })?;
    fileio::write_instance(&args.output, &li)?;
    println!(
        "wrote {} ({} lots, {} farmers, {} features)",
        args.output.display(),
        li.n(),
        li.p(),
        li.s()
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let li = fileio::read_instance(&args.instance)?;
    let rep = fileio::read_report(&args.report)?;
    let t0 = Instant::now();
    verify_report(&li, &rep).map_err(|m| Failure::Input(format!("verification failed: {m}")))?;
    eprintln!("timing: verify {:.1?}", t0.elapsed());
    println!("ok");
    Ok(())
}

/// Recompute everything the report claims and compare exactly.
fn verify_report(li: &LandInstance, rep: &SolutionReport) -> Result<(), String> {
    let (n, p, s) = (li.n(), li.p(), li.s());
    if rep.assignment.len() != n {
        return Err(format!("assignment length {} differs from lot count {n}", rep.assignment.len()));
    }
    if let Some(j) = rep.assignment.iter().position(|&i| i >= p) {
        return Err(format!("lot {j} assigned to nonexistent farmer {}", rep.assignment[j]));
    }
    let part = Partition::new(rep.assignment.clone());

    let mut totals = vec![vec![BigInt::zero(); s]; p];
    for (lot, &i) in li.lots().iter().zip(part.assignment()) {
        let w = li.domain().entry(lot.weight_index);
        for f in 0..s {
            totals[i][f] += w.get(f, i);
        }
    }
    if rep.per_farmer.len() != p {
        return Err(format!("{} per-farmer entries for {p} farmers", rep.per_farmer.len()));
    }
    for i in 0..p {
        let f = &rep.per_farmer[i];
        if f.totals != totals[i] {
            return Err(format!("farmer {i}: reported totals differ from the assignment's"));
        }
        if f.lower != li.lower_bounds()[i] || f.upper != li.upper_bounds()[i] {
            return Err(format!("farmer {i}: bounds differ from the instance's"));
        }
        for k in 0..s {
            if totals[i][k] < f.lower[k] || totals[i][k] > f.upper[k] {
                return Err(format!("farmer {i}: feature {k} total outside bounds"));
            }
        }
        if f.slack_plus.is_empty() && f.slack_minus.is_empty() {
            // Slack-free model: only legitimate when the bounds are exact.
            if f.lower != f.upper {
                return Err(format!("farmer {i}: missing slacks for ranged bounds"));
            }
        } else {
            if f.slack_plus.len() != s || f.slack_minus.len() != s {
                return Err(format!("farmer {i}: slack vectors must have length {s}"));
            }
            for k in 0..s {
                if f.slack_plus[k] != &f.upper[k] - &totals[i][k] {
                    return Err(format!("farmer {i}: slack+ feature {k} inconsistent"));
                }
                if f.slack_minus[k] != &totals[i][k] - &f.lower[k] {
                    return Err(format!("farmer {i}: slack- feature {k} inconsistent"));
                }
            }
        }
    }

    let ts = &rep.trace_summary;
    match rep.objective.as_str() {
        "f1" => {
            let v = evaluate_f1(li, &part).map_err(|e| e.to_string())?;
            if v != rep.value {
                return Err("objective value differs from recomputation".into());
            }
            if ts.final_objective != -&v {
                return Err("trace final objective inconsistent with value".into());
            }
        }
        "f3" => {
            let v = evaluate_f3(li, &part).map_err(|e| e.to_string())?;
            if v != rep.value {
                return Err("objective value differs from recomputation".into());
            }
            if ts.final_objective != -&v {
                return Err("trace final objective inconsistent with value".into());
            }
            if rep.approximation_factor.is_none() {
                return Err("f3 report lacks its approximation factor".into());
            }
        }
        "linear" => {
            let v = evaluate_f1(li, &part).map_err(|e| e.to_string())?;
            if rep.value != -&v {
                return Err("objective value differs from recomputation".into());
            }
            if ts.final_objective != rep.value {
                return Err("trace final objective inconsistent with value".into());
            }
        }
        "clustering-body" => {
            let inst = to_instance(li, LandObjective::F1).map_err(|e| e.to_string())?;
            let y = inst.stacked_utility_sums(&part).map_err(|e| e.to_string())?;
            let spec = ObjectiveSpec::clustering_body(InnerNorm::L2Squared, OuterNorm::L1, 1);
            if spec.evaluate(&y) != Some(rep.value.clone()) {
                return Err("objective value differs from recomputation".into());
            }
        }
        other => return Err(format!("unknown objective `{other}`")),
    }

    let f2 = evaluate_f2(li, &part).map_err(|e| e.to_string())?;
    if f2 != rep.f2_value {
        return Err("f2 value differs from recomputation".into());
    }
    if let Some(factor) = &rep.approximation_factor {
        let want = approximation_factor(li).map_err(|e| e.to_string())?;
        if *factor != want {
            return Err("approximation factor differs from recomputation".into());
        }
    }

    if let Some(steps) = &rep.trace_steps {
        if steps.len() != ts.steps {
            return Err("trace step count differs from summary".into());
        }
        let mut running = ts.start_objective.clone();
        for (k, st) in steps.iter().enumerate() {
            if st.step != k + 1 {
                return Err(format!("trace step {} out of order", st.step));
            }
            if !st.gain.is_positive() || !st.alpha.is_positive() {
                return Err(format!("trace step {} without positive progress", st.step));
            }
            running += &st.gain;
            if running != st.objective {
                return Err(format!("trace step {} objective inconsistent", st.step));
            }
        }
        if running != ts.final_objective {
            return Err("trace does not reach the final objective".into());
        }
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Failure> {
    let li = fileio::read_instance(&args.instance)?;
    let cfg = BruteConfig { max_space: args.max_space };
    let t0 = Instant::now();
    let (name, best) = match args.objective {
        OracleObjective::F1 => ("f1", brute_f1_optimum(&li, &cfg)?),
        OracleObjective::F2 => ("f2", brute_f2_optimum(&li, &cfg)?),
        OracleObjective::F3 => ("f3", brute_f3_optimum(&li, &cfg)?),
    };
    eprintln!("timing: oracle {:.1?}", t0.elapsed());
    match best {
        Some((part, value)) => {
            println!("objective  {name}");
            println!("value      {}", format_rational(&value));
            let cells: Vec<String> = part.assignment().iter().map(usize::to_string).collect();
            println!("assignment {}", cells.join(" "));
            Ok(())
        }
        None => Err(Failure::Infeasible("no feasible partition".into())),
    }
}
