//! Command-line front end: estimate densities, run the KDE/histogram
//! baseline, and execute the built-in verification battery.

mod compare;
mod estimate;
mod input;
mod tsv;
mod verify;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Exit codes: 0 success, 2 non-convergence or failed verification,
/// 3 bad input.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_BAD_INPUT: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    BadInput(String),
    NonConvergence(String),
    CheckFailed(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::BadInput(_) => EXIT_BAD_INPUT,
            CliError::NonConvergence(_) | CliError::CheckFailed(_) => EXIT_NONCONVERGENCE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::BadInput(m) | CliError::NonConvergence(m) | CliError::CheckFailed(m) => m,
        }
    }
}

impl From<denest::Error> for CliError {
    fn from(err: denest::Error) -> Self {
        use denest::Error::*;
        match err {
            DampingFloor { .. } | SingularSystem { .. } | NotConverged { .. }
            | DivergentIterate { .. } | IterationCap { .. } => {
                CliError::NonConvergence(err.to_string())
            }
            other => CliError::BadInput(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::BadInput(err.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "denest",
    about = "Univariate density estimation via a boundary-value problem with interior jump conditions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate a density for each requested smoothness weight alpha.
    Estimate(EstimateArgs),
    /// Gaussian-KDE and histogram baseline on the same data.
    Compare(CompareArgs),
    /// Run the desk-scale verification battery and report pass/fail.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Sample file: one decimal number per line, '#' comments allowed.
    #[arg(long, conflicts_with = "synth")]
    pub input: Option<std::path::PathBuf>,

    /// Synthetic sampler spec `normal:MU,SIGMA2,N` (truncated to [0,1]).
    #[arg(long)]
    pub synth: Option<String>,

    /// Seed for the synthetic sampler.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Comma-separated list of smoothness weights. For file input, alpha is
    /// interpreted in the data's original units and converted through the
    /// unit-interval map.
    #[arg(long, required = true)]
    pub alpha: String,

    /// Structure weight pulling the log-density toward the reference.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,

    /// Reference log-density: `zero` or `normal:MU,SIGMA2`.
    #[arg(long, default_value = "zero")]
    pub w: String,

    /// Nominal grid step size.
    #[arg(long = "h", default_value_t = 0.0005)]
    pub nominal_h: f64,

    /// Stepping scheme: `euler` or `trapezoid`.
    #[arg(long, default_value = "trapezoid")]
    pub scheme: String,

    /// Rescaling margin for file input: extremes map to [margin, 1-margin].
    #[arg(long, default_value_t = 0.05)]
    pub margin: f64,

    /// Residual infinity-norm tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    /// Newton iteration cap.
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,

    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: std::path::PathBuf,

    /// Concurrent solves across the alpha sweep (1 = sequential with
    /// warm starts in descending alpha order).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,

    /// Also print each diagnostics block to stdout.
    #[arg(long, default_value_t = false)]
    pub diagnose: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Comma-separated KDE bandwidths, in original data units.
    #[arg(long)]
    pub bw: Option<String>,

    /// Histogram bin count (default: ceil(sqrt(n))).
    #[arg(long)]
    pub nbins: Option<usize>,

    /// Evaluation points per KDE curve.
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,

    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Scheme whose convergence order is checked: `euler` or `trapezoid`.
    #[arg(long, default_value = "trapezoid")]
    pub scheme: String,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if err.kind() == ErrorKind::DisplayHelp
                || err.kind() == ErrorKind::DisplayVersion =>
        {
            print!("{err}");
            std::process::exit(EXIT_OK);
        }
        Err(err) => {
            eprint!("{err}");
            std::process::exit(EXIT_BAD_INPUT);
        }
    };

    let result = match cli.command {
        Command::Estimate(args) => estimate::run(&args),
        Command::Compare(args) => compare::run(&args),
        Command::Verify(args) => verify::run(&args),
    };

    match result {
        Ok(()) => std::process::exit(EXIT_OK),
        Err(err) => {
            eprintln!("error: {}", err.message());
            std::process::exit(err.exit_code());
        }
    }
}

pub fn parse_scheme(text: &str) -> Result<denest::Scheme, CliError> {
    match text {
        "euler" => Ok(denest::Scheme::Euler),
        "trapezoid" => Ok(denest::Scheme::Trapezoid),
        other => Err(CliError::BadInput(format!(
            "unknown scheme {other:?}; expected euler or trapezoid"
        ))),
    }
}

pub fn parse_alpha_list(text: &str) -> Result<Vec<(String, f64)>, CliError> {
    let mut out = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let value: f64 = token
            .parse()
            .map_err(|_| CliError::BadInput(format!("cannot parse alpha {token:?}")))?;
        if value <= 0.0 || !value.is_finite() {
            return Err(CliError::BadInput(format!("alpha must be positive, got {token}")));
        }
        out.push((token.to_string(), value));
    }
    if out.is_empty() {
        return Err(CliError::BadInput("alpha list is empty".into()));
    }
    Ok(out)
}

pub fn parse_reference(text: &str) -> Result<denest::ReferenceFunction, CliError> {
    if text == "zero" {
        return Ok(denest::ReferenceFunction::Zero);
    }
    if let Some(rest) = text.strip_prefix("normal:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() == 2 {
            let mu: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| CliError::BadInput(format!("bad mean in -w {text:?}")))?;
            let sigma2: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| CliError::BadInput(format!("bad variance in --w {text:?}")))?;
            if sigma2 <= 0.0 {
                return Err(CliError::BadInput(format!("variance must be positive in --w {text:?}")));
            }
            return Ok(denest::ReferenceFunction::NormalLog { mu, sigma2 });
        }
    }
    Err(CliError::BadInput(format!(
        "unknown reference {text:?}; expected zero or normal:MU,SIGMA2"
    )))
}
