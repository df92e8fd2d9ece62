//! Command-line front end for the gridflow solver.
//!
//! Subcommands: `solve`, `verify`, `oracle`, `enumerate`, `generate`.
//! Machine-readable JSON reports with a stable key order go to standard
//! output; a one-line human summary (including wall time) goes to standard
//! error so that reports stay byte-identical across reruns.
//!
//! Exit codes: 0 success, 1 internal error, 2 malformed input (command line
//! or file), 3 infeasible instance, 4 unsupported instance family, 5 work
//! budget exceeded.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use gridflow::{
    check_flow, check_instance_feasible, enumerate_extreme_points_with, evaluate_cost, io,
    reductions, run_with_threads, solve_with, Error, ExecMode, FlowAssignment, GridSpec,
    OracleBudget, SolveOptions,
};

const EXIT_INTERNAL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_UNSUPPORTED: u8 = 4;
const EXIT_BUDGET: u8 = 5;

#[derive(Parser)]
#[command(
    name = "gridflow",
    about = "Exact minimum concave-cost flow on two-dimensional grids",
    long_about = "Solves, verifies, enumerates, and generates concave-cost flow instances \
                  on L x T grids with forward and downward arcs.\n\nExit codes: 0 success, \
                  1 internal error, 2 malformed input, 3 infeasible instance, 4 unsupported \
                  instance family, 5 work budget exceeded.",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file to optimality
    Solve(SolveArgs),
    /// Check a flow file against an instance file
    Verify(VerifyArgs),
    /// Brute-force optimum over all extreme points
    Oracle(OracleArgs),
    /// List every extreme point of the flow polyhedron
    Enumerate(EnumerateArgs),
    /// Write a test instance (and a decision certificate when one exists)
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (JSON)
    instance: PathBuf,
    /// Write the optimal flow to this file
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (1 = fully sequential, 0 = one per core)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Relative tolerance for cost cross-checks
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Maximum state-graph transition evaluations
    #[arg(long, default_value_t = 5_000_000)]
    state_budget: u64,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file (JSON)
    instance: PathBuf,
    /// Flow file (JSON)
    flow: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// Instance file (JSON)
    instance: PathBuf,
    /// Worker threads (1 = fully sequential, 0 = one per core)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Instance file (JSON)
    instance: PathBuf,
    /// Worker threads (1 = fully sequential, 0 = one per core)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct BudgetArgs {
    /// Maximum grid vertices for extreme-point enumeration
    #[arg(long, default_value_t = OracleBudget::default().max_vertices)]
    budget_vertices: usize,
    /// Maximum (tree, bound-pattern) combinations for enumeration
    #[arg(long, default_value_t = OracleBudget::default().max_combinations)]
    budget_combinations: u64,
}

impl BudgetArgs {
    fn to_budget(&self) -> OracleBudget {
        OracleBudget {
            max_vertices: self.budget_vertices,
            max_combinations: self.budget_combinations,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Two-row lot-sizing horizon: fixed-charge production, linear holding
    Ulsp,
    /// Knapsack gadget: three rows, capacitated downward arcs, two sink rows
    KnapsackTwoSinkRows,
    /// Knapsack gadget: item values as forward-arc capacities
    KnapsackForwardCaps,
    /// Partition gadget: square grid with sinks down the diagonal
    PartitionStaircase,
    /// Partition gadget: three rows, one column pair per item
    PartitionPairedColumns,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Model::Ulsp => "ulsp",
            Model::KnapsackTwoSinkRows => "knapsack-two-sink-rows",
            Model::KnapsackForwardCaps => "knapsack-forward-caps",
            Model::PartitionStaircase => "partition-staircase",
            Model::PartitionPairedColumns => "partition-paired-columns",
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Which instance family to generate
    #[arg(long, value_enum)]
    model: Model,
    /// Instance file to write; the certificate lands next to it
    #[arg(long)]
    output: PathBuf,
    /// Seed for randomized parameters (ignored when lists are given)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Item count for knapsack/partition models
    #[arg(long, default_value_t = 4)]
    items: usize,
    /// Period count for the lot-sizing model
    #[arg(long, default_value_t = 6)]
    periods: usize,
    /// Explicit item values (knapsack/partition), e.g. --values 3,1,4
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<i64>>,
    /// Explicit item costs (knapsack), e.g. --costs 2,1,1
    #[arg(long, value_delimiter = ',')]
    costs: Option<Vec<i64>>,
    /// Knapsack cost budget (the decision threshold)
    #[arg(long)]
    budget: Option<i64>,
    /// Knapsack value target
    #[arg(long)]
    target: Option<i64>,
    /// Downward capacity bound for knapsack-two-sink-rows (default: sum of values)
    #[arg(long)]
    bound: Option<i64>,
    /// Explicit per-period demands for ulsp, e.g. --demands 0,3,1
    #[arg(long, value_delimiter = ',')]
    demands: Option<Vec<i64>>,
    /// Fixed production charge per period (ulsp)
    #[arg(long, default_value_t = 4.0)]
    setup: f64,
    /// Linear production cost per unit (ulsp)
    #[arg(long, default_value_t = 0.0)]
    unit: f64,
    /// Linear holding cost per unit per period (ulsp)
    #[arg(long, default_value_t = 1.0)]
    holding: f64,
}

/// One nonzero arc of a flow, with one-based vertex coordinates matching
/// the file format.
#[derive(Serialize)]
struct FlowRow {
    from: [usize; 2],
    to: [usize; 2],
    flow: i64,
}

fn flow_rows(flow: &FlowAssignment) -> Vec<FlowRow> {
    flow.nonzero()
        .map(|(arc, x)| {
            let (t, h) = (arc.tail(), arc.head());
            FlowRow {
                from: [t.row + 1, t.col + 1],
                to: [h.row + 1, h.col + 1],
                flow: x,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct SolveReport<'a> {
    command: &'a str,
    instance: String,
    case: String,
    cost: f64,
    flows: Vec<FlowRow>,
    states: u64,
    states_per_stage: Vec<usize>,
    state_graph_arcs: u64,
    candidate_row_sizes: Vec<usize>,
    oracle_queries: u64,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    command: &'a str,
    instance: String,
    flow: String,
    feasible: bool,
    violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost: Option<f64>,
}

#[derive(Serialize)]
struct OracleReport<'a> {
    command: &'a str,
    instance: String,
    extreme_points: u64,
    cost: f64,
    flows: Vec<FlowRow>,
}

#[derive(Serialize)]
struct EnumerateReport<'a> {
    command: &'a str,
    instance: String,
    extreme_points: u64,
    points: Vec<Vec<FlowRow>>,
}

#[derive(Serialize)]
struct GenerateReport<'a> {
    command: &'a str,
    model: &'a str,
    seed: u64,
    rows: usize,
    cols: usize,
    instance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args, started),
        Command::Verify(args) => cmd_verify(&args, started),
        Command::Oracle(args) => cmd_oracle(&args, started),
        Command::Enumerate(args) => cmd_enumerate(&args, started),
        Command::Generate(args) => cmd_generate(&args, started),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_)
        | Error::NetSupplyNonzero(_)
        | Error::UnknownArc { .. }
        | Error::EmptyGrid { .. }
        | Error::SupplyShape { .. }
        | Error::NegativeCapacity { .. }
        | Error::BadCostSpec { .. }
        | Error::NonconcaveCost { .. }
        | Error::NonPositiveInput { .. }
        | Error::OddTotal(_)
        | Error::BoundBelowMaxItem { .. } => EXIT_INPUT,
        Error::InfeasibleInstance => EXIT_INFEASIBLE,
        Error::Unsupported { .. } => EXIT_UNSUPPORTED,
        Error::TooLarge { .. } | Error::StateSpaceTooLarge { .. } => EXIT_BUDGET,
        _ => EXIT_INTERNAL,
    }
}

fn lib_err(err: Error) -> Failure {
    Failure::new(exit_code_for(&err), err)
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_INTERNAL, format!("cannot write {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<GridSpec, Failure> {
    io::read_instance(&read_to_string(path)?).map_err(lib_err)
}

fn print_report<T: Serialize>(report: &T) -> Result<(), Failure> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Failure::new(EXIT_INTERNAL, format!("cannot serialize report: {e}")))?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        // A closed pipe (e.g. piping into `head`) is a normal way for the
        // reader to stop early, not an error worth reporting.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(Failure::new(
            EXIT_INTERNAL,
            format!("cannot write report: {e}"),
        )),
    }
}

fn exec_for(threads: usize) -> ExecMode {
    if threads == 1 {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn cmd_solve(args: &SolveArgs, started: Instant) -> Result<(), Failure> {
    let grid = load_instance(&args.instance)?;
    let opts = SolveOptions {
        exec: exec_for(args.threads),
        oracle_budget: args.budget.to_budget(),
        state_budget: args.state_budget,
        tolerance: args.tolerance,
    };
    let sol =
        run_with_threads(args.threads, || solve_with(&grid, &opts)).map_err(lib_err)?;
    if let Some(path) = &args.output {
        write_file(path, &io::write_flow(&sol.flow))?;
    }
    let report = SolveReport {
        command: "solve",
        instance: args.instance.display().to_string(),
        case: sol.method.to_string(),
        cost: sol.cost,
        flows: flow_rows(&sol.flow),
        states: sol.stats.states,
        states_per_stage: sol.stats.stage_state_counts.clone(),
        state_graph_arcs: sol.stats.transitions,
        candidate_row_sizes: sol.stats.candidate_row_sizes.clone(),
        oracle_queries: sol.stats.extreme_points.unwrap_or(0),
    };
    print_report(&report)?;
    eprintln!(
        "solved {}x{} instance via {} in {:.1?}: cost {}",
        grid.rows(),
        grid.cols(),
        sol.method,
        started.elapsed(),
        sol.cost
    );
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, started: Instant) -> Result<(), Failure> {
    let grid = load_instance(&args.instance)?;
    let flow = io::read_flow(&read_to_string(&args.flow)?).map_err(lib_err)?;
    if flow.rows() != grid.rows() || flow.cols() != grid.cols() {
        return Err(Failure::new(
            EXIT_INPUT,
            format!(
                "flow is for a {}x{} grid but the instance is {}x{}",
                flow.rows(),
                flow.cols(),
                grid.rows(),
                grid.cols()
            ),
        ));
    }
    let check = check_flow(&grid, &flow);
    let feasible = check.is_ok();
    let cost = if feasible {
        Some(evaluate_cost(&grid, &flow).map_err(lib_err)?)
    } else {
        None
    };
    let report = VerifyReport {
        command: "verify",
        instance: args.instance.display().to_string(),
        flow: args.flow.display().to_string(),
        feasible,
        violations: check.violations.iter().map(|v| v.to_string()).collect(),
        cost,
    };
    print_report(&report)?;
    match cost {
        Some(c) => eprintln!("flow is feasible with cost {c} ({:.1?})", started.elapsed()),
        None => eprintln!(
            "flow is infeasible with {} violation(s) ({:.1?})",
            check.violations.len(),
            started.elapsed()
        ),
    }
    Ok(())
}

/// Enumerates extreme points after an explicit feasibility check, so that
/// infeasible instances exit with their own code rather than "no points".
fn enumerate_checked(
    grid: &GridSpec,
    budget: OracleBudget,
    threads: usize,
) -> Result<Vec<FlowAssignment>, Failure> {
    if !check_instance_feasible(grid) {
        return Err(lib_err(Error::InfeasibleInstance));
    }
    run_with_threads(threads, || {
        enumerate_extreme_points_with(grid, budget, exec_for(threads))
    })
    .map_err(lib_err)
}

fn cmd_oracle(args: &OracleArgs, started: Instant) -> Result<(), Failure> {
    let grid = load_instance(&args.instance)?;
    let points = enumerate_checked(&grid, args.budget.to_budget(), args.threads)?;
    let mut best: Option<(f64, &FlowAssignment)> = None;
    for point in &points {
        let cost = evaluate_cost(&grid, point).map_err(lib_err)?;
        if best.map_or(true, |(c, _)| cost < c) {
            best = Some((cost, point));
        }
    }
    let (cost, flow) = best.ok_or_else(|| {
        Failure::new(EXIT_INTERNAL, "feasible instance yielded no extreme points")
    })?;
    let report = OracleReport {
        command: "oracle",
        instance: args.instance.display().to_string(),
        extreme_points: points.len() as u64,
        cost,
        flows: flow_rows(flow),
    };
    print_report(&report)?;
    eprintln!(
        "scanned {} extreme point(s) in {:.1?}: optimum {}",
        points.len(),
        started.elapsed(),
        cost
    );
    Ok(())
}

fn cmd_enumerate(args: &EnumerateArgs, started: Instant) -> Result<(), Failure> {
    let grid = load_instance(&args.instance)?;
    let points = enumerate_checked(&grid, args.budget.to_budget(), args.threads)?;
    let report = EnumerateReport {
        command: "enumerate",
        instance: args.instance.display().to_string(),
        extreme_points: points.len() as u64,
        points: points.iter().map(flow_rows).collect(),
    };
    print_report(&report)?;
    eprintln!(
        "enumerated {} extreme point(s) in {:.1?}",
        points.len(),
        started.elapsed()
    );
    Ok(())
}

/// Path of the certificate written next to an instance file: `x.json`
/// becomes `x.cert.json`, anything else gets `.cert.json` appended.
fn certificate_path(instance: &Path) -> PathBuf {
    let name = instance.to_string_lossy();
    match name.strip_suffix(".json") {
        Some(stem) => PathBuf::from(format!("{stem}.cert.json")),
        None => PathBuf::from(format!("{name}.cert.json")),
    }
}

#[derive(Serialize)]
struct CertificateFile {
    rule: RuleDto,
    expected: Option<bool>,
}

#[derive(Serialize)]
struct RuleDto {
    kind: &'static str,
    threshold: f64,
}

fn certificate_file(cert: &reductions::Certificate) -> CertificateFile {
    let rule = match cert.rule {
        reductions::VerdictRule::CostAtMost(c) => RuleDto {
            kind: "cost-at-most",
            threshold: c,
        },
        reductions::VerdictRule::CostExactly(c) => RuleDto {
            kind: "cost-exactly",
            threshold: c,
        },
    };
    CertificateFile {
        rule,
        expected: cert.expected,
    }
}

fn knapsack_from(args: &GenerateArgs, rng: &mut ChaCha8Rng) -> Result<reductions::KnapsackInstance, Failure> {
    let (values, costs) = match (&args.values, &args.costs) {
        (Some(v), Some(c)) => (v.clone(), c.clone()),
        (None, None) => {
            let n = args.items.max(1);
            let values: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
            let costs: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
            (values, costs)
        }
        _ => {
            return Err(Failure::new(
                EXIT_INPUT,
                "give both --values and --costs, or neither",
            ))
        }
    };
    let value_total: i64 = values.iter().sum();
    let cost_total: i64 = costs.iter().sum();
    let budget = args.budget.unwrap_or_else(|| rng.gen_range(1..=cost_total));
    let target = args.target.unwrap_or_else(|| rng.gen_range(1..=value_total));
    reductions::KnapsackInstance::new(values, costs, budget, target).map_err(lib_err)
}

fn partition_from(args: &GenerateArgs, rng: &mut ChaCha8Rng) -> Result<reductions::PartitionInstance, Failure> {
    let values = match &args.values {
        Some(v) => v.clone(),
        None => {
            let n = args.items.max(1);
            let mut values: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=6)).collect();
            if values.iter().sum::<i64>() % 2 != 0 {
                // Flip the parity while staying inside [1, 6].
                if values[0] < 6 {
                    values[0] += 1;
                } else {
                    values[0] -= 1;
                }
            }
            values
        }
    };
    reductions::PartitionInstance::new(values).map_err(lib_err)
}

fn cmd_generate(args: &GenerateArgs, started: Instant) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (grid, certificate) = match args.model {
        Model::Ulsp => {
            let demands = match &args.demands {
                Some(d) => d.clone(),
                None => (0..args.periods.max(1))
                    .map(|_| rng.gen_range(0..=9))
                    .collect(),
            };
            let periods = demands.len();
            let production =
                vec![gridflow::CostSpec::fixed_charge(args.setup, args.unit); periods];
            let holding = vec![gridflow::CostSpec::linear(args.holding); periods.saturating_sub(1)];
            let grid =
                reductions::lot_sizing_grid(&demands, &production, &holding).map_err(lib_err)?;
            (grid, None)
        }
        Model::KnapsackTwoSinkRows => {
            let kp = knapsack_from(args, &mut rng)?;
            let bound = args.bound.unwrap_or_else(|| kp.values.iter().sum());
            let red = reductions::knapsack_two_sink_rows(&kp, bound).map_err(lib_err)?;
            (red.grid, Some(red.certificate))
        }
        Model::KnapsackForwardCaps => {
            let kp = knapsack_from(args, &mut rng)?;
            let red = reductions::knapsack_forward_caps(&kp).map_err(lib_err)?;
            (red.grid, Some(red.certificate))
        }
        Model::PartitionStaircase => {
            let pp = partition_from(args, &mut rng)?;
            let red = reductions::partition_staircase(&pp).map_err(lib_err)?;
            (red.grid, Some(red.certificate))
        }
        Model::PartitionPairedColumns => {
            let pp = partition_from(args, &mut rng)?;
            let red = reductions::partition_paired_columns(&pp).map_err(lib_err)?;
            (red.grid, Some(red.certificate))
        }
    };
    write_file(&args.output, &io::write_instance(&grid).map_err(lib_err)?)?;
    let cert_path = match &certificate {
        Some(cert) => {
            let path = certificate_path(&args.output);
            let text = serde_json::to_string_pretty(&certificate_file(cert)).map_err(|e| {
                Failure::new(EXIT_INTERNAL, format!("cannot serialize certificate: {e}"))
            })?;
            write_file(&path, &(text + "\n"))?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let report = GenerateReport {
        command: "generate",
        model: args.model.name(),
        seed: args.seed,
        rows: grid.rows(),
        cols: grid.cols(),
        instance: args.output.display().to_string(),
        certificate: cert_path,
    };
    print_report(&report)?;
    eprintln!(
        "generated {} instance ({}x{}) in {:.1?}",
        args.model.name(),
        grid.rows(),
        grid.cols(),
        started.elapsed()
    );
    Ok(())
}
