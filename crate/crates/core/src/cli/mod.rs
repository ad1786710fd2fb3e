//! Command-line front end. Exit codes: 0 success or certified, 1 certified
//! negative, 2 undecided or inconclusive, 3 usage or I/O error.

mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::FrameError;

pub use output::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "framelab",
    version,
    about = "Approximate Schauder frames and approximately dual systems on l^p model spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Override the exponent of every loaded system.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, env = "FRAMELAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Compression horizons for sequence-space norms, e.g. 4,8,16.
    #[arg(long, global = true, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    /// Report destination; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Random probes used by reconstruction checks.
    #[arg(long, global = true, default_value_t = 16)]
    pub probes: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bessel bounds and, on finite spaces, frame bounds.
    Validate {
        #[arg(long)]
        f: PathBuf,
    },
    /// Norm certificates of the analysis, synthesis and frame operators.
    Bounds {
        #[arg(long)]
        f: PathBuf,
    },
    /// Exact duality check of G against F.
    DualCheck {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// Canonical dual systems of a finite p-ASF.
    CanonicalDual {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Dual from parameters U, V; with A and B, an approximate dual with
    /// U, V close to the identity.
    ParametrizeDual {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long, requires = "b")]
        a: Option<PathBuf>,
        #[arg(long, requires = "a")]
        b: Option<PathBuf>,
    },
    /// Certifies both defect norms below one.
    ApproxCert {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// Operator factorization of F, or of an approximately dual pair.
    Factorize {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: Option<PathBuf>,
    },
    /// Neumann refinement of an approximately dual pair.
    Neumann {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Approximate duality of G for a perturbation F of its dual H.
    Perturb {
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        f: PathBuf,
    },
    /// p-excess of a finite system.
    Excess {
        #[arg(long)]
        f: PathBuf,
        /// Greedy lower bound instead of subset enumeration.
        #[arg(long)]
        greedy: bool,
    },
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Worked examples, optionally exported as frame-system files.
    Gallery {
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Compares the p-excess of random certified approximately dual pairs.
    ExcessInvariance {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        #[arg(long, default_value_t = 6)]
        max_m: usize,
        /// Pair every base system with itself.
        #[arg(long)]
        mirror: bool,
        /// Directory receiving excess_invariance.csv and excess_invariance.json.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

impl ValueEnum for Format {
    fn value_variants<'a>() -> &'a [Self] {
        &[Format::Json, Format::Csv, Format::Human]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Human => "human",
        }))
    }
}

/// Exit code for a library error that ends a command.
pub fn error_code(e: &FrameError) -> i32 {
    match e {
        FrameError::NotInvertible { .. }
        | FrameError::ConditionOperatorSingular(_)
        | FrameError::NormConditionViolated(_) => EXIT_NEGATIVE,
        FrameError::Undecided(_) | FrameError::UnboundedCertificate(_) => EXIT_UNDECIDED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match commands::execute(&cli) {
        Ok(outcome) => match output::emit(&cli, &outcome, stdout) {
            Ok(()) => outcome.code,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            error_code(&e)
        }
    }
}
