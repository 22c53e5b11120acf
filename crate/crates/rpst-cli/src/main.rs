//! `rpst` command line: run private rank tests on CSV data, drive Monte
//! Carlo sweeps, and validate the closed forms against brute-force oracles.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use rpst_cli::io::{
    read_paired_csv, read_two_sample_csv, write_results_csv, ClassicTestReport,
    PrivateTestReport, SCHEMA,
};
use rpst_cli::sim::sweep as run_sweep;
use rpst_cli::sweep::{expand, SweepFile};
use rpst_cli::validate;

use rpst_core::privacy::{PrivacyBudget, DEFAULT_SPLIT};
use rpst_core::ranks::ModificationSpec;
use rpst_core::transforms::TransformSpec;
use rpst_core::{classic_siegel_tukey, rpsr_test, rpst_test, Alternation, Error, TestOptions};

#[derive(Parser)]
#[command(name = "rpst", version, about = "Differentially private rank tests for scale and paired location")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a test on a CSV file and print a JSON report.
    Test {
        #[command(subcommand)]
        which: TestCommand,
    },
    /// Run a Monte Carlo sweep from a TOML grid config.
    Simulate(SimulateArgs),
    /// Run the brute-force oracle suite and report each check.
    Validate(ValidateArgs),
}

#[derive(Subcommand)]
enum TestCommand {
    /// Private two-sample scale test (input columns: value,group).
    Rpst(RpstArgs),
    /// Private paired signed-rank test (input columns: x,y).
    Rpsr(RpsrArgs),
    /// Classical Siegel-Tukey test with half-normal critical values.
    Classic(ClassicArgs),
}

#[derive(Args)]
struct CommonTestArgs {
    /// Input CSV path.
    #[arg(long)]
    input: PathBuf,
    /// Rank transformation: arctan, log1p, sqrt, identity, square, power:<k>.
    #[arg(long, default_value = "identity")]
    psi: String,
    /// Proportion of central ranks to zero (Q = floor(n*q)).
    #[arg(long, conflicts_with = "q_count")]
    q: Option<f64>,
    /// Zero exactly this many central ranks.
    #[arg(long)]
    q_count: Option<usize>,
    /// Significance level used for the rejection line in the report.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// RNG seed; falls back to RPST_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Uniform tie-breaking jitter scale (ties are an error without it).
    #[arg(long)]
    jitter: Option<f64>,
}

#[derive(Args)]
struct RpstArgs {
    #[command(flatten)]
    common: CommonTestArgs,
    /// Total privacy budget eps = eps_U + eps_d.
    #[arg(long)]
    eps: f64,
    /// Fraction of eps spent on the statistic.
    #[arg(long, default_value_t = DEFAULT_SPLIT)]
    split: f64,
    /// Leakage probability of the group-size estimate.
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    /// Subtract each group's median first (not private; simulation use).
    #[arg(long)]
    center_medians: bool,
    /// Use the pairwise alternation instead of one point per side.
    #[arg(long)]
    pairwise: bool,
}

#[derive(Args)]
struct RpsrArgs {
    #[command(flatten)]
    common: CommonTestArgs,
    /// Privacy budget (all of it goes to the statistic).
    #[arg(long)]
    eps: f64,
}

#[derive(Args)]
struct ClassicArgs {
    /// Input CSV path (columns: value,group).
    #[arg(long)]
    input: PathBuf,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Sweep config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; falls back to RPST_SEED, then the config's seed, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Record per-cell wall time in the CSV. Off by default so repeated
    /// runs stay byte-identical.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Largest n for the subset-enumeration checks.
    #[arg(long, default_value_t = 9)]
    max_n: usize,
}

enum CliError {
    /// Bad flags, unreadable or malformed input, invalid configuration.
    Usage(String),
    /// The computation itself failed.
    Internal(String),
    /// A validation check reported failure.
    CheckFailed,
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Internal(_) | CliError::CheckFailed => ExitCode::from(1),
        }
    }
}

fn classify(err: Error) -> CliError {
    match err {
        Error::DegenerateVariance | Error::DegenerateSequence => {
            CliError::Internal(err.to_string())
        }
        _ => CliError::Usage(err.to_string()),
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("RPST_SEED").ok().and_then(|s| s.parse().ok())
}

fn modification(common: &CommonTestArgs) -> Result<ModificationSpec, CliError> {
    match (common.q, common.q_count) {
        (Some(q), None) => {
            if !(0.0..1.0).contains(&q) {
                return Err(CliError::Usage("q must lie in [0,1)".to_string()));
            }
            Ok(ModificationSpec::Proportion(q))
        }
        (None, Some(count)) => Ok(ModificationSpec::Count(count)),
        (None, None) => Ok(ModificationSpec::Proportion(0.0)),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

fn parse_psi(name: &str) -> Result<TransformSpec, CliError> {
    TransformSpec::parse(name).map_err(classify)
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string(value)
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

fn cmd_test_rpst(args: &RpstArgs) -> Result<(), CliError> {
    let (g1, g2) = read_two_sample_csv(read_file(&args.common.input)?.as_bytes())
        .map_err(CliError::Usage)?;
    let psi = parse_psi(&args.common.psi)?;
    let modification = modification(&args.common)?;
    let budget = PrivacyBudget::split_total(args.eps, args.split, args.delta).map_err(classify)?;
    let options = TestOptions {
        alternation: if args.pairwise {
            Alternation::Pairwise
        } else {
            Alternation::OneAtATime
        },
        tie_jitter: args.common.jitter,
        center_medians: args.center_medians,
    };
    let seed = args.common.seed.or_else(env_seed).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = rpst_test(&g1, &g2, &psi, &modification, &budget, &options, &mut rng)
        .map_err(classify)?;
    print_json(&PrivateTestReport {
        schema: SCHEMA,
        test: "rpst",
        seed,
        alpha: args.common.alpha,
        result: &result,
    })
}

fn cmd_test_rpsr(args: &RpsrArgs) -> Result<(), CliError> {
    let pairs =
        read_paired_csv(read_file(&args.common.input)?.as_bytes()).map_err(CliError::Usage)?;
    let psi = parse_psi(&args.common.psi)?;
    let modification = modification(&args.common)?;
    let options = TestOptions {
        tie_jitter: args.common.jitter,
        ..TestOptions::default()
    };
    let seed = args.common.seed.or_else(env_seed).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = rpsr_test(&pairs, &psi, &modification, args.eps, &options, &mut rng)
        .map_err(classify)?;
    print_json(&PrivateTestReport {
        schema: SCHEMA,
        test: "rpsr",
        seed,
        alpha: args.common.alpha,
        result: &result,
    })
}

fn cmd_test_classic(args: &ClassicArgs) -> Result<(), CliError> {
    let (g1, g2) =
        read_two_sample_csv(read_file(&args.input)?.as_bytes()).map_err(CliError::Usage)?;
    let result = classic_siegel_tukey(&g1, &g2, args.alpha).map_err(classify)?;
    print_json(&ClassicTestReport {
        schema: SCHEMA,
        test: "classic",
        result: &result,
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let file = SweepFile::parse(&text)
        .map_err(|e| CliError::Usage(format!("config error: {e}")))?;
    let seed = args.seed.or_else(env_seed).or(file.seed).unwrap_or(0);
    let cells = expand(&file, seed).map_err(classify)?;

    let outcomes = match args.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            pool.install(|| run_sweep(&cells))
        }
        None => run_sweep(&cells),
    };

    let mut buffer = Vec::new();
    write_results_csv(&mut buffer, &outcomes, args.timing)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    fs::write(&args.out, &buffer)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", args.out.display())))?;

    let failed: Vec<(usize, &String)> = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.as_ref().err().map(|e| (i, e)))
        .collect();
    for (i, err) in &failed {
        eprintln!("cell {i} failed: {err}");
    }
    println!(
        "{}",
        serde_json::json!({
            "schema": SCHEMA,
            "command": "simulate",
            "seed": seed,
            "cells": cells.len(),
            "failed_cells": failed.len(),
            "out": args.out.display().to_string(),
        })
    );
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let reports = validate::run_all(args.max_n).map_err(classify)?;
    let mut all_passed = true;
    for r in &reports {
        println!(
            "check {:<26} {} ({})",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
        all_passed &= r.passed;
    }
    if all_passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Test { which } => match which {
            TestCommand::Rpst(args) => cmd_test_rpst(args),
            TestCommand::Rpsr(args) => cmd_test_rpsr(args),
            TestCommand::Classic(args) => cmd_test_classic(args),
        },
        Command::Simulate(args) => cmd_simulate(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Internal(msg) => eprintln!("internal error: {msg}"),
                CliError::CheckFailed => eprintln!("error: validation checks failed"),
            }
            err.exit_code()
        }
    }
}
