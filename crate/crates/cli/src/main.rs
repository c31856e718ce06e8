//! `stabkit`: batch verification runs with JSON reports.
//!
//! Exit status is 0 when every assertion of the run holds, 1 when one
//! fails (the report carries the witness) and 2 on usage or input errors.

mod commands;
mod inputs;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use inputs::{FunctionArgs, InstanceArgs, ProblemArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] stabkit::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            // A run that starts but cannot finish counts as a failed assertion.
            CliError::Core(stabkit::Error::NoConvergence(_) | stabkit::Error::Structural(_)) => 1,
            _ => 2,
        }
    }
}

/// What a subcommand hands back: the report, its verdict and an optional
/// CSV rendering.
pub struct Outcome {
    pub report: Value,
    pub ok: bool,
    pub csv: Option<String>,
}

impl Outcome {
    pub fn new(report: Value, ok: bool) -> Self {
        Outcome { report, ok, csv: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "stabkit", version, about = "Noise stability and sum-of-squares verification runs")]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format; CSV is available for grids and edge lists.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fourier coefficients, influences and Parseval sum of a function.
    Fourier(FunctionArgs),
    /// Two-sided noise stability.
    Stab {
        /// Majority on this many bits, by the O(n²) recursion.
        #[arg(long)]
        maj: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        #[command(flatten)]
        f: FunctionArgs,
    },
    /// The cubic deviation functional by every route.
    Delta {
        #[command(flatten)]
        f: FunctionArgs,
        /// Also check the bound after noise at this σ (needs values in [−1,1]).
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Grid of J and its partials.
    Jgrid {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, default_value_t = 0.1)]
        lo: f64,
        #[arg(long, default_value_t = 0.9)]
        hi: f64,
    },
    /// Randomized sweep of the two-point base case.
    CheckBase {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Tensorized inequality for a pair of smoothed functions.
    CheckTensor {
        #[command(flatten)]
        f: FunctionArgs,
        /// Second function, same options as --f; defaults to the first.
        #[arg(long)]
        g: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long)]
        eps: f64,
        /// Noise parameter of the smoothing step.
        #[arg(long, default_value = "1/10")]
        eta: String,
        /// Skip smoothing (inputs must already lie in [ε, 1−ε]).
        #[arg(long)]
        raw: bool,
    },
    /// Majority-is-Stablest inequality with the fitted constant.
    CheckMist {
        #[command(flatten)]
        f: FunctionArgs,
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        /// Override the constant C(ρ).
        #[arg(long)]
        constant: Option<f64>,
    },
    /// Gaussian inequality by Monte Carlo with its block-sum cube estimate.
    CheckBorell {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Gaussian dimension, 1 to 3.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Bits per block in the cube estimate.
        #[arg(long, default_value_t = 16)]
        block: usize,
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        /// Halfspace threshold on the first coordinate.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
    /// Bernstein approximation of J on [ε, 1−ε]².
    ApproxJ {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// Include the Bernstein net in the output.
        #[arg(long)]
        with_net: bool,
    },
    /// Exact check of a certificate file.
    SosVerify { file: PathBuf },
    /// SDP search for a certificate, or a pseudo-expectation witness.
    SosSearch {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 4)]
        degree: u32,
    },
    /// Emit and verify library certificates.
    SosLibrary {
        /// Fact id; omit for the standard spread of instances.
        #[arg(long)]
        fact: Option<String>,
        /// Fact parameter name=value (repeatable).
        #[arg(long = "param")]
        params: Vec<String>,
        /// Write one certificate file per entry into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check a moment table as a pseudo-expectation.
    SosPe {
        file: PathBuf,
        /// Constraints when the file carries none.
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Reduce a Unique Games instance to a weighted Max-Cut instance.
    Reduce {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        /// Draw this many edges from the sampler instead of enumerating.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Cut value computed directly and through noise stability.
    CutValue {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        /// dictators, random, constant:<c>, or a JSON file of tables.
        #[arg(long, default_value = "dictators")]
        cut: String,
        /// Labels for dictator cuts (defaults to the hidden labeling).
        #[arg(long, value_delimiter = ',')]
        labeling: Option<Vec<usize>>,
    },
    /// The three Max-Cut thresholds and their ordering.
    Bounds {
        /// Defaults to −0.1, −0.2, …, −0.9.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        rho: Option<Vec<f64>>,
    },
    /// The full acceptance battery.
    Suite {
        /// Run only these criteria (1..=12).
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<usize>>,
    },
}

fn write_out(text: &str, path: &Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            // A closed pipe is not worth a panic.
            let _ = out.write_all(text.as_bytes());
            let _ = out.flush();
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let outcome = commands::dispatch(&cli.command, cli.seed, cli.format)?;
    let text = match (cli.format, &outcome.csv) {
        (Format::Csv, Some(csv)) => csv.clone(),
        (Format::Csv, None) => return Err(CliError::Usage("this subcommand has no CSV output".into())),
        (Format::Json, _) => {
            let mut s = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
            s.push('\n');
            s
        }
    };
    write_out(&text, &cli.output)?;
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("stabkit: assertion failed; see the report for the witness");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("stabkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
