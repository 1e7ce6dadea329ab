//! `formkit` command-line interface.
//!
//! Exit codes: 0 pass (or inconclusive), 1 check failure, 2 spec/parse
//! error, 3 numeric/guard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use formkit::commands::{self, CliOverrides, RunOptions};
use formkit::report::{Report, Verdict};
use formkit::spec_io::ProblemSpec;

#[derive(Parser)]
#[command(name = "formkit", version, about = "Verification toolkit for sesquilinear form representation identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Polar decomposition and intertwining checks for a matrix spec
    Polar(CommonArgs),
    /// Radon-Nikodym representation, solvability, and graph-norm battery
    Analyze(CommonArgs),
    /// Second-representation factorizations (U, W, V) and sampled identity
    SecondRep(CommonArgs),
    /// Recover the unique form with a given associated operator
    FromOperator(CommonArgs),
    /// Diagonal / grid operator family sweeps
    Diagonal(CommonArgs),
    /// Run every applicable check over a corpus directory
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct CommonArgs {
    /// Problem spec (JSON)
    #[arg(long)]
    input: PathBuf,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the relative tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Truncation sweep dimensions, e.g. 8,32,128
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// RNG seed recorded in the report
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampled vector pairs per identity
    #[arg(long)]
    samples: Option<usize>,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (used by verify)
    #[arg(long)]
    jobs: Option<usize>,
    /// Omit the generated_at field so reports are byte-identical across runs
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Corpus directory; defaults to $FORMKIT_CORPUS or ./corpus
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    no_timestamp: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, result, format, output) = match &cli.command {
        Command::Polar(args) => run_single("polar", args),
        Command::Analyze(args) => run_single("analyze", args),
        Command::SecondRep(args) => run_single("second-rep", args),
        Command::FromOperator(args) => run_single("from-operator", args),
        Command::Diagonal(args) => run_single("diagonal", args),
        Command::Verify(args) => run_verify(args),
    };

    let report = match result {
        Ok(report) => report,
        Err(e) => {
            eprintln!("formkit {name}: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    let rendered = match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    if let Some(path) = output {
        if let Err(e) = std::fs::write(&path, &rendered) {
            eprintln!("formkit {name}: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    } else {
        print!("{rendered}");
    }

    match report.overall {
        Verdict::Pass | Verdict::Inconclusive => ExitCode::SUCCESS,
        Verdict::Fail => ExitCode::from(1),
    }
}

type RunOutcome = (
    &'static str,
    formkit::Result<Report>,
    Format,
    Option<PathBuf>,
);

fn run_single(name: &'static str, args: &CommonArgs) -> RunOutcome {
    let result = (|| {
        let spec = ProblemSpec::from_path(&args.input)?;
        let opts = RunOptions::resolve(
            &spec,
            &CliOverrides {
                tol: args.tol,
                dims: args.dims.clone(),
                seed: args.seed,
                samples: args.samples,
                timestamp: !args.no_timestamp,
            },
        )?;
        commands::run_command(name, &spec, &opts)
    })();
    (name, result, args.format, args.output.clone())
}

fn run_verify(args: &VerifyArgs) -> RunOutcome {
    let corpus = args
        .input
        .clone()
        .or_else(|| std::env::var_os("FORMKIT_CORPUS").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("corpus"));
    let result = (|| {
        let mut opts = RunOptions::default();
        if let Some(tol) = args.tol {
            opts.tol.rel_tol = tol;
            opts.tol.validate()?;
        }
        if let Some(dims) = &args.dims {
            opts.dims = dims.clone();
        }
        if let Some(seed) = args.seed {
            opts.seed = seed;
        }
        if let Some(samples) = args.samples {
            opts.samples = samples;
        }
        opts.timestamp = !args.no_timestamp;
        commands::cmd_verify(&corpus, &opts, args.jobs.unwrap_or(1))
    })();
    ("verify", result, args.format, args.output.clone())
}
