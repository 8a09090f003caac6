//! Command-line front end for the optkit solvers: solve single instances,
//! run seeded benchmark sweeps that emit plot-ready CSV, and count or
//! enumerate the solutions of binary models.
//!
//! Exit codes are a stable contract: 0 on success (optimal, gap-limit stop,
//! or a completed heuristic/report), 2 on usage errors, 3 when the instance
//! is infeasible, 4 when a time or node limit cut the search short.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use optkit::instance_io::{read_instance, ProblemInstance};
use optkit::problems::{chocolate_knapsack_instance, fruit_diet_instance, ProblemError};
use optkit::tsp::{
    build_full_sec_model, build_two_way_assignment, extract_cycles, random_cities, read_cities,
    separate_subtours, solve_tsp_lazy, write_tour_edges_csv, DistanceMatrix, SubtourMode, Tour,
    TspError, ARC_ON_THRESHOLD, FULL_SEC_MAX_CITIES,
};
use optkit::{
    build_diet_model, build_facility_model, build_knapsack_model, build_set_cover_model,
    count_solutions, enumerate_best, grasp_set_cover, greedy_tour, multi_start_greedy,
    random_facility, random_knapsack, random_set_cover, semi_greedy_tour, solve_milp, two_opt,
    Acceptance, Assignment, BranchRule, ChildOrder, LinearConstraintDef, MilpOutcome, ModelDef,
    NodeStrategy, RclConfig, SetCoverInstance, SolveStatus, SolverConfig,
};

/// Environment variable consulted for the default per-solve time limit
/// (seconds) when `--time-limit` is not given.
const TIME_LIMIT_VAR: &str = "OPTKIT_TIME_LIMIT";
const DEFAULT_TIME_LIMIT: f64 = 600.0;
/// Restarts used by the randomized methods (`semi_greedy` picks one start,
/// `grasp` runs this many construction rounds).
const GRASP_ITERATIONS: usize = 50;

#[derive(Parser)]
#[command(
    name = "optkit",
    version,
    about = "Exact and heuristic solvers for small discrete-optimization problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the solution.
    Solve(SolveArgs),
    /// Run a seeded benchmark sweep, one CSV row per (method, size, trial).
    Bench(BenchArgs),
    /// Count every solution of a binary model (the objective is ignored).
    Count(TargetArgs),
    /// Print the best k solution values of a binary model, best first.
    Enumerate(EnumerateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemArg {
    Diet,
    Knapsack,
    Facility,
    Setcover,
    Tsp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchProblem {
    Knapsack,
    Facility,
    Setcover,
    Tsp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Branch and bound on the explicit model.
    Bnb,
    /// Branch and bound with every subtour constraint written up front.
    #[value(name = "full_sec")]
    FullSec,
    /// Branch and bound with subtour constraints separated lazily.
    Lazy,
    /// Nearest-neighbor construction from the first city.
    Greedy,
    /// Nearest-neighbor from every start, keeping the best.
    #[value(name = "multi_start")]
    MultiStart,
    /// Randomized nearest-neighbor (restricted candidate list).
    #[value(name = "semi_greedy")]
    SemiGreedy,
    /// Pairwise-exchange local search on top of the greedy tour.
    #[value(name = "two_opt")]
    TwoOpt,
    /// Randomized multi-start construction for set covering.
    Grasp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NodeStrategyArg {
    #[value(name = "best_bound")]
    BestBound,
    #[value(name = "depth_first")]
    DepthFirst,
    #[value(name = "breadth_first")]
    BreadthFirst,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchRuleArg {
    #[value(name = "most_fractional")]
    MostFractional,
    #[value(name = "lowest_index")]
    LowestIndex,
    Random,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Seed for generated instances and randomized methods.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock budget per solve, in seconds. Falls back to
    /// $OPTKIT_TIME_LIMIT, then to 600.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Stop once the relative optimality gap is at or below this.
    #[arg(long)]
    gap: Option<f64>,
    /// Which open node branch and bound expands next.
    #[arg(long, value_enum, default_value_t = NodeStrategyArg::BestBound)]
    node_strategy: NodeStrategyArg,
    /// How branch and bound picks the variable to split on.
    #[arg(long, value_enum, default_value_t = BranchRuleArg::MostFractional)]
    branch_rule: BranchRuleArg,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem family.
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// Instance file: a city CSV for tsp, the key/value instance text
    /// otherwise. Without it, diet and knapsack fall back to built-in data
    /// and the rest need --n.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Instance size: city count for tsp (prefix of the file, or generated),
    /// item/store/set count for the generators.
    #[arg(long)]
    n: Option<usize>,
    /// Solution method. Defaults to lazy for tsp and bnb otherwise.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Write the solution here: origin,destination,miles rows for tsp,
    /// var,value rows otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// Problem family to sweep.
    #[arg(long, value_enum)]
    problem: BenchProblem,
    /// Comma-separated methods to compare.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    methods: Vec<MethodArg>,
    /// Comma-separated instance sizes.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    sizes: Vec<usize>,
    /// Independent instances per size.
    #[arg(long, default_value_t = 30)]
    trials: usize,
    /// Add a build_s column with the model-construction time.
    #[arg(long)]
    include_build: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct TargetArgs {
    /// Problem family (the model must be all-binary).
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// Instance file; see `solve --help`.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Instance size for generated instances.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// How many solutions to list.
    #[arg(long, default_value_t = 3)]
    k: usize,
}

/// An error that is the caller's fault — bad flags, bad files, bad
/// combinations. Reported on stderr and mapped to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Count(args) => cmd_count(args),
        Command::Enumerate(args) => cmd_enumerate(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing: tokens, method tables, configs, instance loading.

fn problem_token(p: ProblemArg) -> &'static str {
    match p {
        ProblemArg::Diet => "diet",
        ProblemArg::Knapsack => "knapsack",
        ProblemArg::Facility => "facility",
        ProblemArg::Setcover => "setcover",
        ProblemArg::Tsp => "tsp",
    }
}

fn method_token(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Bnb => "bnb",
        MethodArg::FullSec => "full_sec",
        MethodArg::Lazy => "lazy",
        MethodArg::Greedy => "greedy",
        MethodArg::MultiStart => "multi_start",
        MethodArg::SemiGreedy => "semi_greedy",
        MethodArg::TwoOpt => "two_opt",
        MethodArg::Grasp => "grasp",
    }
}

fn valid_methods(p: ProblemArg) -> &'static [MethodArg] {
    match p {
        ProblemArg::Diet | ProblemArg::Knapsack | ProblemArg::Facility => &[MethodArg::Bnb],
        ProblemArg::Setcover => &[MethodArg::Bnb, MethodArg::Grasp],
        ProblemArg::Tsp => &[
            MethodArg::FullSec,
            MethodArg::Lazy,
            MethodArg::Greedy,
            MethodArg::MultiStart,
            MethodArg::SemiGreedy,
            MethodArg::TwoOpt,
        ],
    }
}

fn default_method(p: ProblemArg) -> MethodArg {
    match p {
        ProblemArg::Tsp => MethodArg::Lazy,
        _ => MethodArg::Bnb,
    }
}

fn check_pair(problem: ProblemArg, method: MethodArg) -> Result<()> {
    if valid_methods(problem).contains(&method) {
        return Ok(());
    }
    let table = [
        ProblemArg::Tsp,
        ProblemArg::Knapsack,
        ProblemArg::Facility,
        ProblemArg::Setcover,
        ProblemArg::Diet,
    ]
    .iter()
    .map(|&p| {
        let methods = valid_methods(p)
            .iter()
            .map(|&m| method_token(m))
            .collect::<Vec<_>>()
            .join("|");
        format!("{}: {}", problem_token(p), methods)
    })
    .collect::<Vec<_>>()
    .join("; ");
    Err(usage(format!(
        "method {} does not apply to {}; valid pairs — {}",
        method_token(method),
        problem_token(problem),
        table
    )))
}

fn effective_time_limit(flag: Option<f64>) -> Result<f64> {
    let limit = match flag {
        Some(t) => t,
        None => match std::env::var(TIME_LIMIT_VAR) {
            Ok(raw) => raw
                .trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("{TIME_LIMIT_VAR}={raw:?} is not a number")))?,
            Err(_) => DEFAULT_TIME_LIMIT,
        },
    };
    if !(limit > 0.0) {
        return Err(usage(format!("time limit must be positive, got {limit}")));
    }
    Ok(limit)
}

fn solver_config(flags: &SolverFlags) -> Result<SolverConfig> {
    let mut config = SolverConfig {
        node_strategy: match flags.node_strategy {
            NodeStrategyArg::BestBound => NodeStrategy::BestBound,
            NodeStrategyArg::DepthFirst => NodeStrategy::DepthFirst,
            NodeStrategyArg::BreadthFirst => NodeStrategy::BreadthFirst,
        },
        branch_rule: match flags.branch_rule {
            BranchRuleArg::MostFractional => BranchRule::MostFractional,
            BranchRuleArg::LowestIndex => BranchRule::LowestIndex,
            BranchRuleArg::Random => BranchRule::Random,
        },
        seed: flags.seed,
        child_order: ChildOrder::LeFirst,
        ..SolverConfig::default()
    };
    if let Some(gap) = flags.gap {
        if !(gap >= 0.0) {
            return Err(usage(format!("--gap must be nonnegative, got {gap}")));
        }
        config.rel_gap_tol = gap;
    }
    config.time_limit = Some(effective_time_limit(flags.time_limit)?);
    Ok(config)
}

enum Loaded {
    Tsp(DistanceMatrix),
    Inst(ProblemInstance),
}

fn load(problem: ProblemArg, file: Option<&Path>, n: Option<usize>, seed: u64) -> Result<Loaded> {
    if n == Some(0) {
        return Err(usage("--n must be at least 1"));
    }
    if problem == ProblemArg::Tsp {
        let cities = match file {
            Some(path) => read_cities(path, n)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?,
            None => {
                let n = n.ok_or_else(|| usage("tsp needs --file or --n"))?;
                random_cities(n, &mut ChaCha8Rng::seed_from_u64(seed))
            }
        };
        let dm = DistanceMatrix::from_cities(&cities).map_err(|e| usage(e.to_string()))?;
        return Ok(Loaded::Tsp(dm));
    }
    if let Some(path) = file {
        let inst =
            read_instance(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        if inst.kind() != problem_token(problem) {
            return Err(usage(format!(
                "{} holds a {} instance, but --problem says {}",
                path.display(),
                inst.kind(),
                problem_token(problem)
            )));
        }
        return Ok(Loaded::Inst(inst));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = match (problem, n) {
        (ProblemArg::Diet, None) => ProblemInstance::Diet(fruit_diet_instance()),
        (ProblemArg::Diet, Some(_)) => {
            return Err(usage(
                "diet has no generator; drop --n to use the built-in data, or pass --file",
            ))
        }
        (ProblemArg::Knapsack, None) => ProblemInstance::Knapsack(chocolate_knapsack_instance()),
        (ProblemArg::Knapsack, Some(n)) => {
            let mut inst = random_knapsack(Some(n), &mut rng);
            inst.seed = Some(seed);
            ProblemInstance::Knapsack(inst)
        }
        (ProblemArg::Facility, Some(n)) => {
            let mut inst = random_facility(facility_count(n), n, &mut rng);
            inst.seed = Some(seed);
            ProblemInstance::Facility(inst)
        }
        (ProblemArg::Setcover, Some(n)) => {
            let mut inst = random_set_cover(n, 2 * n, 0.3, &mut rng)?;
            inst.seed = Some(seed);
            ProblemInstance::SetCover(inst)
        }
        (ProblemArg::Facility, None) | (ProblemArg::Setcover, None) => {
            return Err(usage(format!(
                "{} needs --file or --n",
                problem_token(problem)
            )))
        }
        (ProblemArg::Tsp, _) => unreachable!("handled above"),
    };
    Ok(Loaded::Inst(inst))
}

/// Facilities offered to `n` stores in generated instances: one per three
/// stores, at least two.
fn facility_count(stores: usize) -> usize {
    (stores / 3).max(2)
}

fn build_model(inst: &ProblemInstance) -> Result<ModelDef> {
    Ok(match inst {
        ProblemInstance::Diet(d) => build_diet_model(d)?,
        ProblemInstance::Knapsack(k) => build_knapsack_model(k)?,
        ProblemInstance::Facility(f) => {
            let (model, shortfall) = build_facility_model(f)?;
            if shortfall {
                eprintln!(
                    "warning: total capacity is below total demand; no assignment can work"
                );
            }
            model
        }
        ProblemInstance::SetCover(s) => build_set_cover_model(s)?,
    })
}

fn status_token(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::GapLimit => "gap_limit",
        SolveStatus::TimeLimit => "time_limit",
        SolveStatus::NodeLimit => "node_limit",
    }
}

fn exit_for(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal | SolveStatus::GapLimit => 0,
        SolveStatus::Infeasible => 3,
        SolveStatus::TimeLimit | SolveStatus::NodeLimit => 4,
    }
}

// ---------------------------------------------------------------------------
// solve

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let method = args.method.unwrap_or_else(|| default_method(args.problem));
    check_pair(args.problem, method)?;
    let config = solver_config(&args.solver)?;
    let loaded = load(
        args.problem,
        args.file.as_deref(),
        args.n,
        args.solver.seed,
    )?;
    match loaded {
        Loaded::Tsp(dm) => solve_tsp(&dm, method, &config, &args.solver, args.out.as_deref()),
        Loaded::Inst(ProblemInstance::SetCover(inst)) if method == MethodArg::Grasp => {
            solve_grasp(&inst, &args.solver, args.out.as_deref())
        }
        Loaded::Inst(inst) => solve_exact(&inst, &config, args.out.as_deref()),
    }
}

fn solve_exact(inst: &ProblemInstance, config: &SolverConfig, out: Option<&Path>) -> Result<u8> {
    let model = build_model(inst)?;
    let outcome = solve_milp(&model, config, None)?;
    println!("status: {}", status_token(outcome.status));
    if let Some(inc) = &outcome.incumbent {
        println!("objective: {}", inc.value);
    }
    println!("nodes: {}", outcome.stats.nodes_explored);
    println!("runtime_s: {:.6}", outcome.stats.runtime);
    if let Some(inc) = &outcome.incumbent {
        println!("solution:");
        for (v, &x) in model.variables.iter().zip(&inc.assignment.values) {
            if x != 0.0 {
                println!("  {} = {}", v.name, x);
            }
        }
        if let Some(path) = out {
            write_var_values(path, &model, &inc.assignment)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(exit_for(outcome.status))
}

fn solve_tsp(
    dm: &DistanceMatrix,
    method: MethodArg,
    config: &SolverConfig,
    flags: &SolverFlags,
    out: Option<&Path>,
) -> Result<u8> {
    match method {
        MethodArg::Lazy => match solve_tsp_lazy(dm, config) {
            Ok((tour, value, stats)) => report_tour(
                dm,
                &tour,
                value,
                status_token(stats.status),
                stats.runtime,
                stats.nodes_explored,
                out,
                exit_for(stats.status),
            ),
            Err(TspError::NoTour { status }) => {
                println!("status: {}", status_token(status));
                Ok(exit_for(status))
            }
            Err(e) => Err(e.into()),
        },
        MethodArg::FullSec => {
            let model = build_full_sec_model(dm).map_err(|e| usage(e.to_string()))?;
            let outcome = solve_milp(&model, config, None)?;
            let Some(inc) = &outcome.incumbent else {
                println!("status: {}", status_token(outcome.status));
                return Ok(exit_for(outcome.status));
            };
            let tour = tour_from_arcs(&inc.assignment.values, dm.len())?;
            report_tour(
                dm,
                &tour,
                inc.value,
                status_token(outcome.status),
                outcome.stats.runtime,
                outcome.stats.nodes_explored,
                out,
                exit_for(outcome.status),
            )
        }
        _ => {
            let clock = Instant::now();
            let (tour, value) = run_tsp_heuristic(dm, method, flags.seed)?;
            let runtime = clock.elapsed().as_secs_f64();
            report_tour(dm, &tour, value, "heuristic", runtime, 0, out, 0)
        }
    }
}

fn run_tsp_heuristic(dm: &DistanceMatrix, method: MethodArg, seed: u64) -> Result<(Tour, f64)> {
    let start = dm.names[0].clone();
    Ok(match method {
        MethodArg::Greedy => {
            let tour = greedy_tour(dm, &start)?;
            let length = tour.length(dm);
            (tour, length)
        }
        MethodArg::MultiStart => multi_start_greedy(dm)?,
        MethodArg::SemiGreedy => {
            let cfg = RclConfig { rcl_size: 3, seed };
            let tour = semi_greedy_tour(dm, &start, &cfg)?;
            let length = tour.length(dm);
            (tour, length)
        }
        MethodArg::TwoOpt => {
            let tour = greedy_tour(dm, &start)?;
            two_opt(&tour, dm, Acceptance::FirstImprovement)?
        }
        _ => unreachable!("pair validation keeps exact methods out of here"),
    })
}

/// Decode a full-SEC incumbent back into the single cycle it must trace.
fn tour_from_arcs(values: &[f64], n: usize) -> Result<Tour> {
    let mut cycles = extract_cycles(values, n, ARC_ON_THRESHOLD)?;
    if cycles.len() != 1 {
        anyhow::bail!("solution splits into {} cycles; expected one tour", cycles.len());
    }
    Ok(Tour::new(cycles.pop().expect("one cycle"), n)?)
}

#[allow(clippy::too_many_arguments)]
fn report_tour(
    dm: &DistanceMatrix,
    tour: &Tour,
    value: f64,
    status: &str,
    runtime: f64,
    nodes: usize,
    out: Option<&Path>,
    code: u8,
) -> Result<u8> {
    println!("status: {status}");
    println!("objective: {value}");
    println!("nodes: {nodes}");
    println!("runtime_s: {runtime:.6}");
    let mut line = String::from("tour: ");
    for &city in &tour.order {
        line.push_str(&dm.names[city]);
        line.push_str(" -> ");
    }
    line.push_str(&dm.names[tour.order[0]]);
    println!("{line}");
    if let Some(path) = out {
        let file = File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = BufWriter::new(file);
        write_tour_edges_csv(tour, dm, &mut w)?;
        w.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(code)
}

fn solve_grasp(inst: &SetCoverInstance, flags: &SolverFlags, out: Option<&Path>) -> Result<u8> {
    let cfg = RclConfig {
        rcl_size: 3,
        seed: flags.seed,
    };
    let clock = Instant::now();
    let result = grasp_set_cover(inst, GRASP_ITERATIONS, &cfg)?;
    let runtime = clock.elapsed().as_secs_f64();
    println!("status: heuristic");
    println!("objective: {}", result.total_cost);
    println!("nodes: 0");
    println!("runtime_s: {runtime:.6}");
    println!("solution:");
    for &s in &result.chosen {
        println!("  set[{s}] = 1");
    }
    if let Some(path) = out {
        let file = File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "var,value")?;
        for s in 0..inst.sets.len() {
            let value = if result.chosen.contains(&s) { 1 } else { 0 };
            writeln!(w, "set[{s}],{value}")?;
        }
        w.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn write_var_values(path: &Path, model: &ModelDef, assignment: &Assignment) -> Result<()> {
    let file =
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "var,value")?;
    for (v, &x) in model.variables.iter().zip(&assignment.values) {
        if v.name.contains(',') {
            writeln!(w, "\"{}\",{}", v.name, x)?;
        } else {
            writeln!(w, "{},{}", v.name, x)?;
        }
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// count / enumerate

fn binary_target(args: &TargetArgs) -> Result<ModelDef> {
    let loaded = load(args.problem, args.file.as_deref(), args.n, args.solver.seed)?;
    match loaded {
        Loaded::Tsp(dm) => build_full_sec_model(&dm).map_err(|e| usage(e.to_string())),
        Loaded::Inst(inst) => build_model(&inst),
    }
}

/// Recast the engine's binary-only complaints as usage errors; everything
/// else stays an internal failure.
fn map_not_binary(err: ProblemError) -> anyhow::Error {
    match err {
        ProblemError::NotBinary { .. } => usage(err.to_string()),
        other => other.into(),
    }
}

fn cmd_count(args: TargetArgs) -> Result<u8> {
    let model = binary_target(&args)?;
    let config = solver_config(&args.solver)?;
    let count = count_solutions(&model, &config).map_err(map_not_binary)?;
    println!("{count}");
    Ok(0)
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<u8> {
    if args.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let model = binary_target(&args.target)?;
    let config = solver_config(&args.target.solver)?;
    let best = enumerate_best(&model, args.k, &config).map_err(map_not_binary)?;
    for (_, value) in &best {
        println!("{value}");
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// bench

/// One benchmark observation, before formatting.
struct BenchRow {
    size: usize,
    trial: usize,
    seed: u64,
    runtime_s: f64,
    build_s: f64,
    objective: Option<f64>,
    nodes: usize,
    status: &'static str,
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if args.sizes.contains(&0) {
        return Err(usage("sizes must be at least 1"));
    }
    let problem = match args.problem {
        BenchProblem::Knapsack => ProblemArg::Knapsack,
        BenchProblem::Facility => ProblemArg::Facility,
        BenchProblem::Setcover => ProblemArg::Setcover,
        BenchProblem::Tsp => ProblemArg::Tsp,
    };
    for &method in &args.methods {
        check_pair(problem, method)?;
        if method == MethodArg::FullSec {
            if let Some(&big) = args.sizes.iter().find(|&&s| s > FULL_SEC_MAX_CITIES) {
                return Err(usage(format!(
                    "full_sec enumerates every subtour constraint and is capped at \
                     {FULL_SEC_MAX_CITIES} cities; size {big} needs the lazy method"
                )));
            }
        }
    }
    let config = solver_config(&args.solver)?;

    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).with_context(|| {
            format!("cannot create {}", path.display())
        })?)),
        None => Box::new(std::io::stdout().lock()),
    };
    if args.include_build {
        writeln!(
            sink,
            "problem,method,size,trial,seed,runtime_s,build_s,objective,nodes,status"
        )?;
    } else {
        writeln!(sink, "problem,method,size,trial,seed,runtime_s,objective,nodes,status")?;
    }

    for &method in &args.methods {
        for &size in &args.sizes {
            for trial in 0..args.trials {
                let row = bench_trial(args.problem, method, size, trial, args.solver.seed, &config)?;
                let objective = row
                    .objective
                    .map(|v| v.to_string())
                    .unwrap_or_default();
                if args.include_build {
                    writeln!(
                        sink,
                        "{},{},{},{},{},{:.6},{:.6},{},{},{}",
                        problem_token(problem),
                        method_token(method),
                        row.size,
                        row.trial,
                        row.seed,
                        row.runtime_s,
                        row.build_s,
                        objective,
                        row.nodes,
                        row.status
                    )?;
                } else {
                    writeln!(
                        sink,
                        "{},{},{},{},{},{:.6},{},{},{}",
                        problem_token(problem),
                        method_token(method),
                        row.size,
                        row.trial,
                        row.seed,
                        row.runtime_s,
                        objective,
                        row.nodes,
                        row.status
                    )?;
                }
            }
        }
    }
    sink.flush()?;
    Ok(0)
}

/// Per-trial instance seed: mixes the campaign seed with the size and trial
/// index (splitmix64 finalizer) so trials are independent but reproducible,
/// and paired methods see the identical instance.
fn derive_seed(seed: u64, size: usize, trial: usize) -> u64 {
    let mut x = seed
        .wrapping_add((size as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn bench_trial(
    problem: BenchProblem,
    method: MethodArg,
    size: usize,
    trial: usize,
    campaign_seed: u64,
    config: &SolverConfig,
) -> Result<BenchRow> {
    let seed = derive_seed(campaign_seed, size, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut row = BenchRow {
        size,
        trial,
        seed,
        runtime_s: 0.0,
        build_s: 0.0,
        objective: None,
        nodes: 0,
        status: "heuristic",
    };
    match problem {
        BenchProblem::Tsp => {
            let dm = DistanceMatrix::from_cities(&random_cities(size, &mut rng))?;
            match method {
                MethodArg::FullSec => {
                    let build_clock = Instant::now();
                    let model = build_full_sec_model(&dm)?;
                    row.build_s = build_clock.elapsed().as_secs_f64();
                    let outcome = timed_milp(&model, config, None, &mut row)?;
                    row.objective = outcome.incumbent.map(|i| i.value);
                }
                MethodArg::Lazy => {
                    let build_clock = Instant::now();
                    let model = build_two_way_assignment(&dm)?;
                    row.build_s = build_clock.elapsed().as_secs_f64();
                    let n = dm.len();
                    let mut failure: Option<TspError> = None;
                    let mut callback =
                        |cand: &Assignment| -> Vec<LinearConstraintDef> {
                            match separate_subtours(&cand.values, n, SubtourMode::FirstCycle) {
                                Ok(cuts) => cuts,
                                Err(e) => {
                                    failure = Some(e);
                                    Vec::new()
                                }
                            }
                        };
                    let outcome = timed_milp(&model, config, Some(&mut callback), &mut row)?;
                    if let Some(e) = failure {
                        return Err(e.into());
                    }
                    row.objective = outcome.incumbent.map(|i| i.value);
                }
                _ => {
                    let clock = Instant::now();
                    let (_, value) = run_tsp_heuristic(&dm, method, seed)?;
                    row.runtime_s = clock.elapsed().as_secs_f64();
                    row.objective = Some(value);
                }
            }
        }
        BenchProblem::Knapsack => {
            let mut inst = random_knapsack(Some(size), &mut rng);
            inst.seed = Some(seed);
            let build_clock = Instant::now();
            let model = build_knapsack_model(&inst)?;
            row.build_s = build_clock.elapsed().as_secs_f64();
            let outcome = timed_milp(&model, config, None, &mut row)?;
            row.objective = outcome.incumbent.map(|i| i.value);
        }
        BenchProblem::Facility => {
            let mut inst = random_facility(facility_count(size), size, &mut rng);
            inst.seed = Some(seed);
            let build_clock = Instant::now();
            let (model, _) = build_facility_model(&inst)?;
            row.build_s = build_clock.elapsed().as_secs_f64();
            let outcome = timed_milp(&model, config, None, &mut row)?;
            row.objective = outcome.incumbent.map(|i| i.value);
        }
        BenchProblem::Setcover => {
            let mut inst = random_set_cover(size, 2 * size, 0.3, &mut rng)?;
            inst.seed = Some(seed);
            if method == MethodArg::Grasp {
                let cfg = RclConfig {
                    rcl_size: 3,
                    seed,
                };
                let clock = Instant::now();
                let result = grasp_set_cover(&inst, GRASP_ITERATIONS, &cfg)?;
                row.runtime_s = clock.elapsed().as_secs_f64();
                row.objective = Some(result.total_cost);
            } else {
                let build_clock = Instant::now();
                let model = build_set_cover_model(&inst)?;
                row.build_s = build_clock.elapsed().as_secs_f64();
                let outcome = timed_milp(&model, config, None, &mut row)?;
                row.objective = outcome.incumbent.map(|i| i.value);
            }
        }
    }
    Ok(row)
}

/// Run the engine with the clock around the solve call only, filling the
/// row's timing, node, and status fields.
fn timed_milp(
    model: &ModelDef,
    config: &SolverConfig,
    callback: Option<&mut optkit::bnb::LazyCallback>,
    row: &mut BenchRow,
) -> Result<MilpOutcome> {
    let clock = Instant::now();
    let outcome = solve_milp(model, config, callback)?;
    row.runtime_s = clock.elapsed().as_secs_f64();
    row.nodes = outcome.stats.nodes_explored;
    row.status = status_token(outcome.status);
    Ok(outcome)
}
