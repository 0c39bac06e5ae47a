//! `kummer-cli`: theta values, sections, Kummer quartics and boundary limits
//! from the command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical contract
//! violation.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kummer_core::theta::ThetaConfig;
use kummer_core::Error;

#[derive(Debug, Parser)]
#[command(name = "kummer-cli", version, about = "Level-(2,6) theta functions, Kummer quartics and their degenerations")]
pub struct Cli {
    /// Print the full JSON record on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Absolute truncation tolerance of every theta series, in [1e-14, 1e-6].
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Cap on the theta summation window radius.
    #[arg(long, global = true, default_value_t = 60)]
    pub max_radius: usize,
    #[command(subcommand)]
    pub command: Group,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Theta series with rational characteristic.
    #[command(subcommand)]
    Theta(ThetaCmd),
    /// The twelve sections.
    #[command(subcommand)]
    Sections(SectionsCmd),
    /// Equivariance of the Kummer map.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Kummer map, quartic fits and the coefficient quintic.
    #[command(subcommand)]
    Kummer(KummerCmd),
    /// Corank-1 boundary.
    #[command(subcommand)]
    Degen(DegenCmd),
}

#[derive(Debug, Subcommand)]
pub enum ThetaCmd {
    Eval {
        /// Period matrix: inline JSON or a file.
        #[arg(long)]
        tau: String,
        /// Characteristic `a1,a2,b1,b2`, entries `p/q` with q dividing 6.
        #[arg(long = "char", allow_hyphen_values = true)]
        characteristic: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Basis {
    S,
    T,
    G,
}

#[derive(Debug, Subcommand)]
pub enum SectionsCmd {
    Eval {
        #[arg(long)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, value_enum, default_value = "s")]
        basis: Basis,
    },
    VerifyHeisenberg(TrialArgs),
}

#[derive(Debug, Args)]
pub struct TrialArgs {
    #[arg(long)]
    pub tau: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    Heisenberg(TrialArgs),
}

#[derive(Debug, Subcommand)]
pub enum KummerCmd {
    Map {
        #[arg(long)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    Fit {
        #[arg(long)]
        tau: String,
        #[arg(long, default_value_t = 80)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    QuinticDiscover {
        /// `{"train": [...], "holdout": [...]}`.
        #[arg(long)]
        tau_list: String,
        #[arg(long, default_value_t = 80)]
        samples_per_tau: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a tau list for `quintic-discover`.
    GenerateTaus {
        #[arg(long, default_value_t = 150)]
        train: usize,
        #[arg(long, default_value_t = 20)]
        holdout: usize,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    EmitCloud {
        #[arg(long)]
        tau: String,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        obj: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tau2: String,
    #[arg(long, allow_hyphen_values = true)]
    pub tau3: String,
}

#[derive(Debug, Subcommand)]
pub enum DegenCmd {
    Descriptor {
        #[command(flatten)]
        at: BoundaryArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Classify {
        #[command(flatten)]
        at: BoundaryArgs,
        #[arg(long, default_value_t = 80)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    LimitCheck {
        #[command(flatten)]
        at: BoundaryArgs,
        /// Imaginary part of tau1 for the smooth comparison surface.
        #[arg(long = "Y", default_value_t = 40.0)]
        y: f64,
        /// Chart points, split evenly between the two components.
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    EmitCloud {
        #[command(flatten)]
        at: BoundaryArgs,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        obj: Option<PathBuf>,
    },
}

/// A failed run and its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: 1, message: msg.into() }
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Self { code: 2, message: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidCoordinate
            | Error::NotUpperHalfPlane
            | Error::NotInSiegel
            | Error::NotSpd
            | Error::IllConditioned(_)
            | Error::InvalidConfig(_)
            | Error::UnsupportedCharacteristic(_)
            | Error::PointNotOnTorus
            | Error::UnknownGenerator(_)
            | Error::Indeterminate
            | Error::ZeroVector
            | Error::InsufficientSamples { .. }
            | Error::Precondition(_) => 1,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

pub const MIN_TOL: f64 = 1e-14;
pub const MAX_TOL: f64 = 1e-6;

impl Cli {
    pub fn theta_config(&self) -> Result<ThetaConfig, Failure> {
        if !(MIN_TOL..=MAX_TOL).contains(&self.tol) {
            return Err(Failure::usage(format!("--tol must lie in [{MIN_TOL:e}, {MAX_TOL:e}], got {:e}", self.tol)));
        }
        ThetaConfig::new(self.tol, self.max_radius).map_err(Failure::from)
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("KUMMER_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| Failure::usage(format!("KUMMER_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = init_threads().and_then(|_| commands::run(&cli));
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
