use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use taskshield_core::benchgen::{generate, BenchConfig, BenchError};
use taskshield_core::enumerate::{enumerate_simple_plans_with, EnumerateError};
use taskshield_core::ilp::{export_lp, CoreGuidedSolver};
use taskshield_core::shield::{append_goal_action, build_shield_model, shield_with, Stage};
use taskshield_core::strips::{goal_reachable_with, validate_task, ReachLimits, StripsError};
use taskshield_core::{PlanningTask, ShieldConfig, ShieldError};

use crate::clock::Deadline;
use crate::experiment::{
    self, run_suite, summarize, write_csv, write_summary, ExperimentError, Suite, Variant,
};
use crate::json::{emit_task_json, parse_task_json, TaskJsonError};
use crate::pddl::{self, emit_grounded_domain, emit_grounded_problem, PddlError};
use crate::report::{diff_text, report_json};

#[derive(Debug, Parser)]
#[command(
    name = "taskshield",
    version,
    about = "Make planning tasks unsolvable with minimal action edits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Block every plan with the fewest edits and verify unsolvability.
    Shield(ShieldArgs),
    /// List simple plans.
    Enumerate(EnumerateArgs),
    /// Report whether the goal is reachable.
    Verify(VerifyArgs),
    /// Write a synthetic graph task as JSON.
    Benchgen(BenchgenArgs),
    /// Run a suite of instances and variants into a CSV file.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct TaskInput {
    #[arg(long, requires = "problem", conflicts_with = "task")]
    pub domain: Option<PathBuf>,
    #[arg(long, requires = "domain")]
    pub problem: Option<PathBuf>,
    /// JSON task, instead of a PDDL pair.
    #[arg(long)]
    pub task: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShieldArgs {
    #[command(flatten)]
    pub input: TaskInput,
    /// Number of plans to block, or "all".
    #[arg(long, default_value = "all")]
    pub k: Variant,
    #[arg(long, default_value_t = experiment::DEFAULT_TIME_LIMIT_S)]
    pub time_limit: f64,
    /// Re-solve with any plan that survives the edits until none does.
    #[arg(long)]
    pub refine: bool,
    #[arg(long)]
    pub out_domain: Option<PathBuf>,
    #[arg(long)]
    pub out_problem: Option<PathBuf>,
    /// The modified task as JSON.
    #[arg(long)]
    pub out_task: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Edit list; printed to stdout when absent.
    #[arg(long)]
    pub diff: Option<PathBuf>,
    /// The 0-1 program in LP format.
    #[arg(long)]
    pub lp: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub input: TaskInput,
    #[arg(long, default_value = "all")]
    pub k: Variant,
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: TaskInput,
    #[arg(long, default_value_t = ReachLimits::default().max_states)]
    pub max_states: usize,
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchgenArgs {
    #[arg(long)]
    pub plans: usize,
    #[arg(long)]
    pub min: usize,
    #[arg(long)]
    pub max: usize,
    #[arg(long, default_value_t = 0.4)]
    pub share: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub max_attempts: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-cell means and standard deviations as CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Overrides the suite's per-task limit.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("parse: {0}")]
    Pddl(#[from] PddlError),
    #[error("parse: {0}")]
    Json(#[from] TaskJsonError),
    #[error("invalid task: {}", .0.join("; "))]
    InvalidTask(Vec<String>),
    #[error("{0}")]
    Shield(#[from] ShieldError),
    #[error("enum: {0}")]
    Enumerate(#[from] EnumerateError),
    #[error("verify: {0}")]
    Reach(#[from] StripsError),
    #[error("benchgen: {0}")]
    Bench(#[from] BenchError),
    #[error("experiment: {0}")]
    Experiment(#[from] ExperimentError),
}

/// Process exit codes. Success is 0 and "solved but the task is still
/// solvable" is 2.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 64;
    pub const NOT_SHIELDED: i32 = 2;
    pub const IO: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const INVALID_TASK: i32 = 5;
    pub const ENUMERATE: i32 = 6;
    pub const MODEL: i32 = 7;
    pub const SOLVE: i32 = 8;
    pub const APPLY: i32 = 9;
    pub const VERIFY: i32 = 10;
    pub const BENCHGEN: i32 = 11;
    pub const EXPERIMENT: i32 = 12;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::Pddl(_) | CliError::Json(_) => exit::PARSE,
            CliError::InvalidTask(_) => exit::INVALID_TASK,
            CliError::Shield(e) => match e.stage() {
                Stage::Validate => exit::INVALID_TASK,
                Stage::Enumerate => exit::ENUMERATE,
                Stage::Model => exit::MODEL,
                Stage::Solve => exit::SOLVE,
                Stage::Apply => exit::APPLY,
                Stage::Verify => exit::VERIFY,
            },
            CliError::Enumerate(_) => exit::ENUMERATE,
            CliError::Reach(_) => exit::VERIFY,
            CliError::Bench(_) => exit::BENCHGEN,
            CliError::Experiment(_) => exit::EXPERIMENT,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

/// Loads the task named by the input flags, printing grounding warnings.
pub fn load_task(input: &TaskInput) -> Result<PlanningTask, CliError> {
    let task = match (&input.domain, &input.problem, &input.task) {
        (Some(d), Some(p), None) => {
            let grounded = pddl::load(&read(d)?, &read(p)?, pddl::DEFAULT_GROUND_ACTION_CAP)?;
            for w in &grounded.warnings {
                eprintln!("warning: {w}");
            }
            grounded.task
        }
        (None, None, Some(t)) => parse_task_json(&read(t)?)?,
        _ => {
            return Err(CliError::Usage(
                "give either --domain and --problem, or --task".to_string(),
            ))
        }
    };
    let violations = validate_task(&task);
    if !violations.is_empty() {
        return Err(CliError::InvalidTask(violations));
    }
    Ok(task)
}

fn run_shield(args: &ShieldArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let task = load_task(&args.input)?;
    let config = ShieldConfig {
        refine: args.refine,
        ..ShieldConfig::with_enumeration(args.k.enumeration())
    };
    let clock = Deadline::from_secs(Some(args.time_limit));
    let report = shield_with(&task, &config, &CoreGuidedSolver::default(), &clock)?;

    if let Some(path) = &args.out_domain {
        write(path, &emit_grounded_domain(&report.modified))?;
    }
    if let Some(path) = &args.out_problem {
        write(path, &emit_grounded_problem(&report.modified))?;
    }
    if let Some(path) = &args.out_task {
        write(path, &emit_task_json(&report.modified))?;
    }
    if let Some(path) = &args.report {
        write(path, &report_json(&task, &report))?;
    }
    if let Some(path) = &args.lp {
        let (model, _) = build_shield_model(&append_goal_action(&task, &report.plans))?;
        write(path, &export_lp(&model))?;
    }
    let diff = diff_text(&task, &report);
    match &args.diff {
        Some(path) => write(path, &diff)?,
        None => out.write_all(diff.as_bytes()).map_err(stdout_err)?,
    }
    writeln!(
        out,
        "plans: {} ({})\nmodifications: {}\nverified unsolvable: {}\ntime: {:.3}s (enum {:.3}s, ilp {:.3}s, verify {:.3}s)",
        report.plans.len(),
        if report.enumeration_complete { "complete" } else { "partial" },
        report.num_mods(),
        report.verified_unsolvable,
        report.timings.total_s(),
        report.timings.enumerate_s,
        report.timings.ilp_s,
        report.timings.verify_s,
    )
    .map_err(stdout_err)?;
    if report.refinements > 0 {
        writeln!(out, "refinements: {}", report.refinements).map_err(stdout_err)?;
    }
    if let Some(note) = &report.note {
        writeln!(out, "note: {note}").map_err(stdout_err)?;
    }
    Ok(if report.success {
        exit::OK
    } else {
        exit::NOT_SHIELDED
    })
}

fn run_enumerate(args: &EnumerateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let task = load_task(&args.input)?;
    let clock = Deadline::from_secs(args.time_limit);
    let plans = enumerate_simple_plans_with(&task, &args.k.enumeration(), &clock)?;
    for (i, plan) in plans.plans.iter().enumerate() {
        writeln!(
            out,
            "{}: ({}) cost {}",
            i + 1,
            plan.names(&task).join(", "),
            plan.cost
        )
        .map_err(stdout_err)?;
    }
    writeln!(out, "plans: {}\ncomplete: {}", plans.len(), plans.complete).map_err(stdout_err)?;
    Ok(exit::OK)
}

fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let task = load_task(&args.input)?;
    let clock = Deadline::from_secs(args.time_limit);
    let limits = ReachLimits {
        max_states: args.max_states,
    };
    let reachable = goal_reachable_with(&task, limits, &clock)?;
    writeln!(out, "{}", if reachable { "SOLVABLE" } else { "UNSOLVABLE" }).map_err(stdout_err)?;
    Ok(exit::OK)
}

fn run_benchgen(args: &BenchgenArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut config = BenchConfig::new(args.plans, args.min, args.max, args.seed);
    config.share_fraction = args.share;
    config.max_attempts = args.max_attempts;
    let g = generate(&config)?;
    write(&args.out, &emit_task_json(&g.task))?;
    writeln!(
        out,
        "plans: {}\nfluents: {}\nactions: {}\nseed used: {}",
        g.expected_plans,
        g.task.fluents.len(),
        g.task.actions.len(),
        g.seed_used
    )
    .map_err(stdout_err)?;
    Ok(exit::OK)
}

fn run_experiment(args: &ExperimentArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (mut suite, base) = Suite::from_file(&args.suite)?;
    if args.time_limit.is_some() {
        suite.time_limit_s = args.time_limit;
    }
    if args.threads.is_some() {
        suite.threads = args.threads;
    }
    let rows = run_suite(&suite, &base)?;
    let file = fs::File::create(&args.out).map_err(|source| CliError::Io {
        path: args.out.clone(),
        source,
    })?;
    write_csv(&rows, file).map_err(ExperimentError::from)?;
    let summary = summarize(&rows);
    if let Some(path) = &args.summary {
        let file = fs::File::create(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        write_summary(&summary, file).map_err(ExperimentError::from)?;
    }
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    writeln!(out, "domain\tvariant\tsolved\ttime(s)\t#mods\tsuccess").map_err(stdout_err)?;
    for s in &summary {
        writeln!(
            out,
            "{}\t{}\t{}/{}\t{} ± {}\t{} ± {}\t{}",
            s.domain,
            s.variant,
            s.solved,
            s.instances,
            fmt(s.time_mean_s),
            fmt(s.time_sd_s),
            fmt(s.mods_mean),
            fmt(s.mods_sd),
            s.success
        )
        .map_err(stdout_err)?;
    }
    Ok(exit::OK)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Shield(a) => run_shield(a, out),
        Command::Enumerate(a) => run_enumerate(a, out),
        Command::Verify(a) => run_verify(a, out),
        Command::Benchgen(a) => run_benchgen(a, out),
        Command::Experiment(a) => run_experiment(a, out),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Errors go to stderr.
pub fn main_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
