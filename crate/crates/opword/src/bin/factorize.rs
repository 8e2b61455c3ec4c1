//! Command line front end: suite runs, single factorizations, and word
//! verification. All logic lives in the library; this file only parses
//! arguments, moves JSON in and out, and maps outcomes to exit codes
//! (0 pass, 1 residual failure, 2 invalid input or I/O).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use opword::factorizer::{factorize, verify_word, FactorizeOpts};
use opword::generators::Word;
use opword::harness::{run_suite, ReportFormat, SuiteConfig};
use opword::kernel::BlockOperator;
use opword::{Error, Result};

#[derive(Parser)]
#[command(name = "factorize", version, about = "Factor block unitaries into generator words")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded sweep plus the fixed regression family.
    Run(RunArgs),
    /// Factor one operator from JSON and emit its word.
    One(OneArgs),
    /// Evaluate a word against an operator and print the residual.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated seeds; an empty list keeps only the fixed family.
    #[arg(long, default_value = "1,2,3,4,5")]
    seeds: String,
    /// Comma-separated finite block dimensions for the random cases.
    #[arg(long, default_value = "2,4,8,16,32")]
    dims: String,
    #[arg(long, default_value_t = 64)]
    window: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Report destination; omit to skip the file and print the summary only.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Args)]
struct OneArgs {
    /// Operator JSON to factor.
    input: String,
    /// Word destination; omit to print the word to stdout.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, default_value_t = 64)]
    window: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct CheckArgs {
    /// Word JSON to evaluate.
    word: String,
    /// Operator JSON the word should reproduce.
    input: String,
    #[arg(long, default_value_t = 64)]
    window: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(arg: FormatArg) -> Self {
        match arg {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::InvalidInput(format!("bad {what} entry {s:?}")))
        })
        .collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn cmd_run(args: RunArgs) -> Result<bool> {
    let config = SuiteConfig {
        seeds: parse_list(&args.seeds, "seed")?,
        dims: parse_list(&args.dims, "dim")?,
        window: args.window,
        tol: args.tol,
        out_path: args.out,
        format: args.format.into(),
    };
    let report = run_suite(&config)?;
    for case in report.cases.iter().filter(|c| !c.passed) {
        match (&case.error, case.residual) {
            (Some(err), _) => println!("FAIL {}: {err}", case.label),
            (None, Some(residual)) => println!("FAIL {}: residual {residual:.3e}", case.label),
            (None, None) => println!("FAIL {}", case.label),
        }
    }
    println!(
        "{} cases, max residual {}, random word lengths {:?} (core {:?}): {}",
        report.cases.len(),
        report
            .max_residual
            .map_or_else(|| "n/a".to_string(), |r| format!("{r:.3e}")),
        report.random_word_lengths,
        report.random_core_lengths,
        if report.passed { "PASS" } else { "FAIL" },
    );
    Ok(report.passed)
}

fn cmd_one(args: OneArgs) -> Result<bool> {
    let input: BlockOperator = read_json(&args.input)?;
    let opts = FactorizeOpts {
        window: args.window,
        tol: args.tol,
        ..FactorizeOpts::default()
    };
    let (word, trace) = factorize(&input, &opts)?;
    let mut body = serde_json::to_string_pretty(&word)?;
    body.push('\n');
    match &args.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    eprintln!(
        "residual {:.3e}, length {} ({} core), {} stages",
        trace.final_residual,
        word.len(),
        word.core_len(),
        trace.stages.len(),
    );
    Ok(trace.final_residual <= args.tol)
}

fn cmd_check(args: CheckArgs) -> Result<bool> {
    let word: Word = read_json(&args.word)?;
    let input: BlockOperator = read_json(&args.input)?;
    match verify_word(&word, &input, args.window, args.tol) {
        Ok(residual) => {
            println!("residual {residual:.3e} PASS");
            Ok(true)
        }
        Err(Error::NotUnitary { stage: "verify_word", residual }) => {
            println!("residual {residual:.3e} FAIL");
            Ok(false)
        }
        Err(err) => Err(err),
    }
}

/// Invalid inputs exit 2; anything the pipeline itself gives up on exits 1.
fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Json(_) | Error::InvalidInput(_) => 2,
        Error::NotUnitary { stage: "unitarity_check", .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let outcome = match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::One(args) => cmd_one(args),
        Command::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}
