//! `heun`: evaluate Heun functions through hypergeometric expansions.

mod commands;
mod params;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use heun_core::HeunError;

use params::ParamArgs;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const DEFAULT_TOL: f64 = 1e-10;

/// Exit codes.
pub mod code {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const BAD_INPUT: u8 = 2;
    pub const NO_CONVERGENCE: u8 = 3;
    pub const POLE: u8 = 4;
    pub const NO_TERMINATION: u8 = 5;
    pub const NOT_TWO_TERM: u8 = 6;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(code::BAD_INPUT, message)
    }
}

impl From<HeunError> for CliError {
    fn from(e: HeunError) -> Self {
        Self::new(exit_code_of(&e), e.to_string())
    }
}

pub fn exit_code_of(e: &HeunError) -> u8 {
    match e {
        HeunError::Pole(_) | HeunError::Domain(_) => code::POLE,
        HeunError::NoConvergence { .. }
        | HeunError::StepFailure { .. }
        | HeunError::RootFailure(_)
        | HeunError::TerminationFailure(_) => code::NO_CONVERGENCE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExpansionChoice {
    Ascending,
    DescGamma,
    DescAlpha,
    DescBeta,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseChoice {
    Eps,
    Alpha,
    Beta,
}

#[derive(Debug, Parser)]
#[command(name = "heun", version, about = "Heun functions via Gauss hypergeometric expansions")]
pub struct Cli {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Absolute tolerance, in (0, 1e-2]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Number of expansion coefficients to generate (at least 8)
    #[arg(long, global = true, default_value_t = heun_core::expansions::DEFAULT_TERMS)]
    pub max_terms: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the expansion sum at a list of points
    Eval {
        /// Comma-separated points in [0, 1)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        z: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ExpansionChoice::Auto)]
        expansion: ExpansionChoice,
    },
    /// Accessory-parameter values that terminate the expansion
    Qroots {
        /// Force a termination case; its parameter is set to make it exact
        #[arg(long, value_enum, requires = "n")]
        case: Option<CaseChoice>,
        #[arg(long = "N", requires = "case")]
        n: Option<usize>,
    },
    /// Closed-form u(0), u'(0), u(1) in the two-term regime
    Boundary,
    /// Images of the singular point a under relocations
    Orbit,
    /// Run the randomised self-check suites
    Verify,
}

impl Cli {
    pub fn tolerance(&self) -> Result<f64, CliError> {
        let t = self.tol.unwrap_or(DEFAULT_TOL);
        if !(t > 0.0 && t <= 1e-2) {
            return Err(CliError::input(format!("tolerance {t} outside (0, 1e-2]")));
        }
        Ok(t)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("HEUN_LOG"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { code::BAD_INPUT } else { code::OK });
        }
    };
    match commands::run(&cli) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
