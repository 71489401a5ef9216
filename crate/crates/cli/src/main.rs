use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use finindex::{parse_analysis_list, pretty, run_document, CliError};

/// Index invariants of finite-dimensional C*-inclusions.
#[derive(Debug, Parser)]
#[command(name = "finindex", version)]
struct Args {
    /// JSON job specification.
    #[arg(long)]
    spec: PathBuf,

    /// Comma-separated analyses, overriding the spec
    /// (index, commutant, markov, angle, meet, stability, bound, lattice).
    #[arg(long)]
    analysis: Option<String>,

    /// Seed for sampled checks, overriding the spec.
    #[arg(long)]
    seed: Option<u64>,

    /// Residual tolerance for verification checks.
    #[arg(long)]
    tol: Option<f64>,

    /// Print a text table; the JSON report then goes only to `--out`.
    #[arg(long)]
    pretty: bool,

    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Record wall-clock timings in the report (breaks byte-identical output).
    #[arg(long)]
    timings: bool,
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let text = fs::read_to_string(&args.spec).map_err(|source| CliError::Io {
        path: args.spec.display().to_string(),
        source,
    })?;
    let analyses = args.analysis.as_deref().map(parse_analysis_list).transpose()?;
    let report = run_document(&text, analyses, args.seed, args.tol, args.timings)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(path) => fs::write(path, &json).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None if !args.pretty => print!("{json}"),
        None => {}
    }
    if args.pretty {
        print!("{}", pretty::table(&report));
    }
    for f in &report.verification.failures {
        eprintln!("verification failed: {} = {:e} (tol {:e})", f.check, f.value, f.tol);
    }
    Ok(report.verification.passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
