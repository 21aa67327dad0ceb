//! Command-line front end: parse a constraint file or pick a canned
//! scenario, run the solvers, and emit text, CSV or JSON reports.

mod parse;
mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mininfer::inference::{
    compare_with, jaynes_solve, minent_solve_with, InferenceError, MinentOptions,
};
use mininfer::scenarios::{
    self, chsh_max_mean, find_threshold, sweep, Scenario, ScenarioError, ThresholdPredicate,
};
use report::Format;

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NO_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "mininfer",
    about = "Two-qubit state inference from incomplete measurement data",
    long_about = "Estimates a two-qubit density matrix from exact mean values of an \
                  incomplete observable set, under the maximum-entropy scheme and under \
                  the minimum-entanglement scheme, and reports entanglement figures for \
                  both."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum-entropy estimate for a constraint file.
    Jaynes(SolveArgs),
    /// Minimum-entanglement estimate for a constraint file.
    Minent(MinentArgs),
    /// Run both schemes on a constraint file and classify the outcome.
    Compare(SolveArgs),
    /// Evaluate a scenario over a parameter grid.
    Sweep(SweepArgs),
    /// Bisect for the parameter where a solver's verdict flips inseparable.
    Threshold(ThresholdArgs),
    /// Monte Carlo check that Bell measurement cannot raise entanglement or
    /// lower entropy.
    VerifyLemma(VerifyArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Seed for randomized search paths; overrides MININFER_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report to this file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl CommonArgs {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            std::env::var("MININFER_SEED")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(0)
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Constraint file.
    #[arg(short = 'c', long = "constraints")]
    constraints: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct MinentArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Skip the Bell-simplex reduction and run the randomized general path
    /// even when the reduction applies.
    #[arg(long)]
    force_general: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario: chsh, local or singlet.
    #[arg(long, value_parser = parse_scenario)]
    scenario: Scenario,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    step: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Scenario: chsh, local or singlet.
    #[arg(long, value_parser = parse_scenario)]
    scenario: Scenario,
    /// Which solver's verdict to bisect on: jaynes or minent.
    #[arg(long, value_parser = parse_predicate)]
    which: ThresholdPredicate,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of random states to sample.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[command(flatten)]
    common: CommonArgs,
}

fn parse_scenario(text: &str) -> Result<Scenario, String> {
    Scenario::parse(text).ok_or_else(|| format!("unknown scenario '{text}' (chsh|local|singlet)"))
}

fn parse_predicate(text: &str) -> Result<ThresholdPredicate, String> {
    match text {
        "jaynes" => Ok(ThresholdPredicate::JaynesInseparable),
        "minent" => Ok(ThresholdPredicate::MinentInseparable),
        _ => Err(format!("unknown solver '{text}' (jaynes|minent)")),
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<InferenceError> for Failure {
    fn from(e: InferenceError) -> Self {
        let code = match &e {
            InferenceError::Infeasible | InferenceError::BoundaryMeans => EXIT_INFEASIBLE,
            InferenceError::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Inference(inner) => inner.into(),
            ScenarioError::NoSignChange => Self {
                code: EXIT_NO_CONVERGENCE,
                message: e.to_string(),
            },
            ScenarioError::OutOfRange { .. } => Failure::usage(e.to_string()),
        }
    }
}

fn read_constraints(path: &PathBuf) -> Result<mininfer::ConstraintSet, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse::parse_constraints(&text).map_err(|e| Failure::usage(e.to_string()))
}

fn emit(common: &CommonArgs, body: String) -> Result<(), Failure> {
    match &common.output {
        Some(path) => fs::write(path, body).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{body}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Jaynes(args) => {
            let set = read_constraints(&args.constraints)?;
            let result = jaynes_solve(&set)?;
            emit(
                &args.common,
                report::solve_report(&result, args.common.format.into()),
            )
        }
        Command::Minent(args) => {
            let set = read_constraints(&args.solve.constraints)?;
            let opts = MinentOptions {
                seed: args.solve.common.seed(),
                force_general: args.force_general,
            };
            let result = minent_solve_with(&set, opts)?;
            emit(
                &args.solve.common,
                report::solve_report(&result, args.solve.common.format.into()),
            )
        }
        Command::Compare(args) => {
            let set = read_constraints(&args.constraints)?;
            let opts = MinentOptions {
                seed: args.common.seed(),
                force_general: false,
            };
            let cmp = compare_with(&set, opts)?;
            emit(
                &args.common,
                report::compare_report(&cmp, args.common.format.into()),
            )
        }
        Command::Sweep(args) => {
            let mut to = args.to;
            // The exact top of the CHSH range has no finite-multiplier
            // maximum-entropy state; stop one step short of it.
            let cap = chsh_max_mean() - 1e-9;
            if matches!(args.scenario, Scenario::Chsh | Scenario::Local) && to > cap {
                eprintln!(
                    "warning: clamping sweep end {to} to {cap} (top of the mean-value range)"
                );
                to = cap;
            }
            let rows = sweep(args.scenario, args.from, to, args.step, args.common.seed())?;
            emit(
                &args.common,
                report::sweep_report(args.scenario, &rows, args.common.format.into()),
            )
        }
        Command::Threshold(args) => {
            let value = find_threshold(args.scenario, args.which, args.common.seed())?;
            emit(
                &args.common,
                report::threshold_report(
                    args.scenario,
                    args.which,
                    value,
                    args.common.format.into(),
                ),
            )
        }
        Command::VerifyLemma(args) => {
            if args.samples == 0 {
                return Err(Failure::usage("--samples must be at least 1"));
            }
            let verdict = scenarios::verify_lemma(args.samples, args.common.seed());
            emit(
                &args.common,
                report::lemma_report(&verdict, args.common.format.into()),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
