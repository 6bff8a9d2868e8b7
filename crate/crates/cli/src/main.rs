//! `msp`: command-line front end for the scheduling solvers.
//!
//! Exit codes: 0 success, 1 infeasible, 2 usage or configuration error,
//! 3 internal error.

mod commands;
mod overrides;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "msp", version, about = "Manpower scheduling: headcounts, attendance, rosters and benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimize headcounts for one objective.
    Solve(SolveArgs),
    /// Approximate the Pareto set for two or more objectives.
    Pareto(ParetoArgs),
    /// Generate a roster table for given headcounts, or a rotation.
    Table(TableArgs),
    /// Choose attendance for fixed headcounts.
    Assign(AssignArgs),
    /// Run an experiment and write its report.
    Bench(BenchArgs),
    /// Check an instance file and list every problem found.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Instance TOML file.
    #[arg(long, short)]
    pub instance: PathBuf,
    /// Constraint expression, e.g. "k1&k2&!k5|k3".
    #[arg(long, short, conflicts_with = "constraints_file")]
    pub constraints: Option<String>,
    /// File holding the constraint expression.
    #[arg(long)]
    pub constraints_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Seed for every random choice; a random one is drawn and printed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// TOML file with solver settings (sections `ea`, `pso`, `sa`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one solver setting, e.g. `ea.generations=80`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Objective token: total_time, salary, salary_ms or headcount:a+b, optionally prefixed by min: or max:.
    #[arg(long, default_value = "total_time")]
    pub objective: String,
    /// ea, ea-bg, ip, pso or sa.
    #[arg(long, default_value = "ea")]
    pub solver: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct ParetoArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Objective tokens; give at least two.
    #[arg(long = "objective", required = true)]
    pub objectives: Vec<String>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct AssignArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Headcount per job in instance order, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub headcount: Vec<u32>,
    #[arg(long, default_value = "total_time")]
    pub objective: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// Instance TOML file; required unless --rotation is given.
    #[arg(long, short, required_unless_present = "rotation")]
    pub instance: Option<PathBuf>,
    /// Headcount per job in instance order, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "rotation")]
    pub headcount: Vec<u32>,
    /// Horizon in days; the instance horizon (or one rotation cycle) by default.
    #[arg(long)]
    pub days: Option<usize>,
    /// Rotate POSITIONS over PEOPLE instead, e.g. `3,5`.
    #[arg(long, value_delimiter = ',', value_name = "POSITIONS,PEOPLE", conflicts_with = "instance")]
    pub rotation: Option<Vec<usize>>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// exp1, exp2, exp3, exp4, exp5 or tablegen_timing.
    #[arg(long, short)]
    pub experiment: String,
    #[arg(long, short)]
    pub instance: PathBuf,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Solvers to compare, replacing the experiment's defaults. Repeatable.
    #[arg(long = "solver")]
    pub solvers: Vec<String>,
    /// Constraint expression replacing the experiment's default.
    #[arg(long)]
    pub constraints: Option<String>,
    /// Objective tokens replacing the experiment's defaults.
    #[arg(long = "objective")]
    pub objectives: Vec<String>,
    /// Leave wall-clock fields out so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Instance TOML file.
    pub instance: PathBuf,
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_INFEASIBLE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<msp_core::Error> for Failure {
    fn from(e: msp_core::Error) -> Self {
        use msp_core::Error as E;
        let code = match &e {
            E::Infeasible { .. } | E::GenerationFailed { .. } => EXIT_INFEASIBLE,
            E::Config(_)
            | E::Syntax { .. }
            | E::UnknownAtom { .. }
            | E::SearchSpaceTooLarge { .. }
            | E::InvalidInstance(_)
            | E::Format(_)
            | E::UndefinedMetric(_) => EXIT_USAGE,
            E::Structural(_) | E::Io(_) | E::Csv(_) => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<msp_bench::BenchError> for Failure {
    fn from(e: msp_bench::BenchError) -> Self {
        match e {
            msp_bench::BenchError::Core(e) => e.into(),
            other => Failure::internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = std::panic::catch_unwind(|| commands::dispatch(cli));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
