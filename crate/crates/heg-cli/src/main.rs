//! `heg`: solve, check, generate, and verify expertise-game instances.
//!
//! Exit codes: 0 success or property holds, 1 usage error, 2 capability
//! error (a budget was too tight for an exhaustive oracle), 3 property does
//! not hold (or verification criteria failed).

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use heg_core::algorithms::{
    brute_force_max_joint_utility, cis_algorithm, greedy_core_partition, imitative_brd,
    initial_block_partition, MoveTrace,
};
use heg_core::generators::{
    from_graph, from_max_coverage, from_set_cover, random_instance, RandomParams, SetSystem,
    WeightedGraph,
};
use heg_core::hgcrp::{psi_maximal_partition, TableGame};
use heg_core::stability::{
    is_alpha_core_stable, is_cis, is_core_stable, is_nash_stable, is_pareto_optimal, is_perfect,
    is_socially_optimal, StabilityReport,
};
use heg_core::verify::{run_criterion, CriterionStatus, VerifyConfig, CRITERIA};
use heg_core::{Error, Game, Instance, Limits, Partition, Result};

#[derive(Parser)]
#[command(
    name = "heg",
    version,
    about = "Solvers, stability checkers, and generators for expertise games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Cap on candidate coalitions visited by brute-force scans.
    #[arg(long, global = true, default_value_t = Limits::default().subset_budget)]
    subset_budget: u64,

    /// Cap on agents for exhaustive partition enumeration [default: 8, or
    /// 12 inside verify-paper].
    #[arg(long, global = true)]
    partition_limit: Option<usize>,

    /// Absolute tolerance for real-valued comparisons.
    #[arg(long, global = true, default_value_t = Limits::default().epsilon)]
    epsilon: f64,

    /// Seed for anything randomized [default: 0, or 7 inside verify-paper].
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Machine-readable output where a command has a text form.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a partition of the agents.
    Solve {
        #[arg(long, value_enum)]
        method: Method,
        /// Instance file (type "heg", or "hgcrp" for brute-optimal).
        #[arg(long)]
        instance: PathBuf,
        /// Write the move trace of a dynamic here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Test a partition against a stability concept.
    Check {
        #[arg(long, value_enum)]
        property: Property,
        /// Scale factor for approx-core, in (0, 1].
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        partition: PathBuf,
    },
    /// Build an instance from a covering problem, a graph, or random draws.
    Generate {
        #[arg(long, value_enum)]
        from: SourceKind,
        /// Parameter file; format depends on --from.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Exact reference answers for small inputs.
    Oracle {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long)]
        instance: PathBuf,
        /// Restrict to these agents (comma-separated ids).
        #[arg(long, value_delimiter = ',')]
        pool: Option<Vec<String>>,
    },
    /// Run the desk-scale verification suite.
    #[command(name = "verify-paper")]
    VerifyPaper {
        /// Only these criteria (comma-separated ids, e.g. 1,4,9).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u8>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    GreedyCore,
    Brd,
    Cis,
    BruteOptimal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Ns,
    Cis,
    Core,
    ApproxCore,
    Perfect,
    So,
    Po,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKind {
    MaxCoverage,
    SetCover,
    Hvcg,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    MaxJointUtility,
}

enum LoadedGame {
    Expertise(Box<Instance>),
    Table(TableGame),
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

/// Writes one line to stdout. A consumer that closes the pipe early (head,
/// a pager quitting) ends the run quietly instead of panicking.
fn emit(line: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{line}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("failed writing to stdout: {e}");
    }
}

fn load_game(path: &Path) -> Result<LoadedGame> {
    let text = read_file(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::parse_json(&format!("{}", path.display()), &e))?;
    match value.get("type").and_then(|t| t.as_str()) {
        Some("heg") => Ok(LoadedGame::Expertise(Box::new(Instance::from_json(&text)?))),
        Some("hgcrp") => Ok(LoadedGame::Table(TableGame::from_json(&text)?)),
        Some(other) => Err(Error::Parse(format!(
            "unsupported instance type {other:?} in {}",
            path.display()
        ))),
        None => Err(Error::Parse(format!(
            "missing \"type\" field in {}",
            path.display()
        ))),
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = !matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if usage { 1 } else { 0 };
        }
    };
    let mut limits = Limits {
        subset_budget: cli.subset_budget,
        partition_limit: cli
            .partition_limit
            .unwrap_or(Limits::default().partition_limit),
        epsilon: cli.epsilon,
        ..Limits::default()
    };
    if let Ok(threads) = std::env::var("HEG_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => limits.threads = t,
            _ => {
                eprintln!("error: HEG_THREADS must be a positive integer, got {threads:?}");
                return 1;
            }
        }
    }
    if let Err(e) = limits.validate() {
        eprintln!("error: {e}");
        return 1;
    }
    match dispatch(&cli, &limits) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Capability(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cli: &Cli, limits: &Limits) -> Result<i32> {
    match &cli.command {
        Command::Solve {
            method,
            instance,
            trace,
        } => solve(
            *method,
            instance,
            trace.as_deref(),
            cli.seed.unwrap_or(0),
            limits,
        ),
        Command::Check {
            property,
            alpha,
            instance,
            partition,
        } => check(*property, *alpha, instance, partition, limits),
        Command::Generate { from, spec } => generate(*from, spec, cli.seed.unwrap_or(0)),
        Command::Oracle {
            problem,
            instance,
            pool,
        } => oracle(*problem, instance, pool.as_deref(), limits),
        Command::VerifyPaper { criteria } => verify_paper(
            criteria.as_deref(),
            cli.seed,
            cli.partition_limit,
            cli.json,
            limits,
        ),
    }
}

fn expertise_only(game: LoadedGame, method: &str) -> Result<Instance> {
    match game {
        LoadedGame::Expertise(g) => Ok(*g),
        LoadedGame::Table(_) => Err(Error::InvalidArgument(format!(
            "method {method} needs a type \"heg\" instance; table games only support brute-optimal"
        ))),
    }
}

fn solve(
    method: Method,
    instance: &Path,
    trace_path: Option<&Path>,
    seed: u64,
    limits: &Limits,
) -> Result<i32> {
    let game = load_game(instance)?;
    let (partition_json, trace): (String, Option<MoveTrace>) = match method {
        Method::GreedyCore => {
            let g = expertise_only(game, "greedy-core")?;
            let p = greedy_core_partition(&g);
            (p.to_json(&g), None)
        }
        Method::Brd => {
            let g = expertise_only(game, "brd")?;
            let p0 = initial_block_partition(&g, seed);
            let (p, mut trace) = imitative_brd(&g, &p0, limits)?;
            trace.seed = Some(seed);
            (p.to_json(&g), Some(trace))
        }
        Method::Cis => {
            let g = expertise_only(game, "cis")?;
            let (p, trace) = cis_algorithm(&g, seed, limits)?;
            (p.to_json(&g), Some(trace))
        }
        Method::BruteOptimal => match game {
            LoadedGame::Expertise(g) => {
                let p = psi_maximal_partition(&*g, limits)?;
                (p.to_json(&*g), None)
            }
            LoadedGame::Table(g) => {
                let p = psi_maximal_partition(&g, limits)?;
                (p.to_json(&g), None)
            }
        },
    };
    if let Some(path) = trace_path {
        let trace = trace.ok_or_else(|| {
            Error::InvalidArgument(
                "--trace is only meaningful for the dynamics methods brd and cis".into(),
            )
        })?;
        std::fs::write(path, trace.to_json())
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
    }
    emit(&partition_json);
    Ok(0)
}

fn check_on<G: Game + Sync>(
    g: &G,
    property: Property,
    alpha: Option<f64>,
    partition_path: &Path,
    limits: &Limits,
) -> Result<StabilityReport> {
    let p = Partition::from_json(&read_file(partition_path)?, g)?;
    match (property, alpha) {
        (Property::ApproxCore, Some(a)) => is_alpha_core_stable(g, &p, a, limits),
        (Property::ApproxCore, None) => Err(Error::InvalidArgument(
            "approx-core needs --alpha".into(),
        )),
        (_, Some(_)) => Err(Error::InvalidArgument(
            "--alpha only applies to approx-core".into(),
        )),
        (Property::Ns, None) => is_nash_stable(g, &p, limits),
        (Property::Cis, None) => is_cis(g, &p, limits),
        (Property::Core, None) => is_core_stable(g, &p, limits),
        (Property::Perfect, None) => is_perfect(g, &p, limits),
        (Property::So, None) => is_socially_optimal(g, &p, limits),
        (Property::Po, None) => is_pareto_optimal(g, &p, limits),
    }
}

fn check(
    property: Property,
    alpha: Option<f64>,
    instance: &Path,
    partition: &Path,
    limits: &Limits,
) -> Result<i32> {
    let report = match load_game(instance)? {
        LoadedGame::Expertise(g) => check_on(&*g, property, alpha, partition, limits)?,
        LoadedGame::Table(g) => check_on(&g, property, alpha, partition, limits)?,
    };
    emit(&report.to_json());
    Ok(if report.holds { 0 } else { 3 })
}

fn generate(from: SourceKind, spec: &Path, seed: u64) -> Result<i32> {
    let text = read_file(spec)?;
    let instance = match from {
        SourceKind::MaxCoverage => from_max_coverage(&SetSystem::from_json(&text)?)?,
        SourceKind::SetCover => from_set_cover(&SetSystem::from_json(&text)?)?,
        SourceKind::Hvcg => from_graph(&WeightedGraph::from_json(&text)?)?,
        SourceKind::Random => random_instance(&RandomParams::from_json(&text)?, seed)?,
    };
    emit(&instance.to_json());
    Ok(0)
}

#[derive(Serialize)]
struct OracleReport {
    problem: &'static str,
    members: Vec<String>,
    value: f64,
}

fn oracle(
    problem: Problem,
    instance: &Path,
    pool: Option<&[String]>,
    limits: &Limits,
) -> Result<i32> {
    let Problem::MaxJointUtility = problem;
    let g = expertise_only(load_game(instance)?, "max-joint-utility")?;
    let pool: Vec<usize> = match pool {
        Some(ids) => ids
            .iter()
            .map(|id| g.agent_index(id))
            .collect::<Result<_>>()?,
        None => (0..g.agent_count()).collect(),
    };
    let best = brute_force_max_joint_utility(&g, &pool, limits)?;
    let report = OracleReport {
        problem: "max-joint-utility",
        members: best.ids(&g),
        value: g.joint_utility(&best),
    };
    emit(&serde_json::to_string_pretty(&report).expect("report serialization cannot fail"));
    Ok(0)
}

fn verify_paper(
    criteria: Option<&[u8]>,
    seed: Option<u64>,
    partition_limit: Option<usize>,
    json: bool,
    limits: &Limits,
) -> Result<i32> {
    let mut config = VerifyConfig::default();
    config.limits.subset_budget = limits.subset_budget;
    config.limits.epsilon = limits.epsilon;
    config.limits.threads = limits.threads;
    if let Some(limit) = partition_limit {
        config.limits.partition_limit = limit;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let ids: Vec<u8> = match criteria {
        Some(list) => {
            for id in list {
                if !CRITERIA.iter().any(|(i, _)| i == id) {
                    return Err(Error::InvalidArgument(format!(
                        "no criterion with id {id}; valid ids are 1..={}",
                        CRITERIA.len()
                    )));
                }
            }
            list.to_vec()
        }
        None => CRITERIA.iter().map(|(id, _)| *id).collect(),
    };
    let outcomes: Vec<_> = ids.iter().map(|&id| run_criterion(id, &config)).collect();
    if json {
        emit(&serde_json::to_string_pretty(&outcomes).expect("outcome serialization cannot fail"));
    } else {
        for outcome in &outcomes {
            emit(&outcome.line());
        }
        let passed = outcomes
            .iter()
            .filter(|o| o.status == CriterionStatus::Pass)
            .count();
        emit(&format!("{passed}/{} criteria passed", outcomes.len()));
    }
    let any_fail = outcomes.iter().any(|o| o.status == CriterionStatus::Fail);
    let any_skip = outcomes
        .iter()
        .any(|o| o.status == CriterionStatus::Skipped);
    Ok(if any_fail {
        3
    } else if any_skip {
        2
    } else {
        0
    })
}
