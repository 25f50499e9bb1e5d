use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use refined_young::{Family, Mutation};

#[derive(Debug, Parser)]
#[command(
    name = "refined-young",
    version,
    about = "Evaluate and randomly verify refined Young, Heinz and Kantorovich mean bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the unmodified suites; exits 1 if any inequality is violated.
    Verify(RunArgs),
    /// Like verify, optionally with a deliberately broken formula.
    Fuzz {
        #[command(flatten)]
        run: RunArgs,
        /// A catalogue entry such as `strengthened-exponent`.
        #[arg(long, default_value = "none")]
        mutation: Mutation,
    },
    /// Margins of the refined bounds over their classical baselines.
    Tightness(RunArgs),
    /// Evaluate every bound at one explicit instance.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Re-run the configurations in a JSON report and compare verdicts.
    Check { report: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Scalar,
    Operator,
    Hs,
    All,
}

impl FamilyArg {
    pub fn families(self) -> Vec<Family> {
        match self {
            FamilyArg::Scalar => vec![Family::Scalar],
            FamilyArg::Operator => vec![Family::Operator],
            FamilyArg::Hs => vec![Family::Hs],
            FamilyArg::All => Family::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(value_enum, default_value = "all")]
    pub family: FamilyArg,
    /// Trials per family (defaults: scalar 100000, operator and hs 1500).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Matrix sizes cycled over trials, e.g. `2,4,8`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Relative tolerance for the inequalities.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Relative tolerance for refined-versus-baseline margins.
    #[arg(long)]
    pub dominance_tol: Option<f64>,
    /// Relative separation of the two operator spectra.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Sampling range `lo,hi` for scalars and eigenvalues.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub range: Option<Vec<f64>>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    Scalar {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        v: f64,
    },
    Operator {
        #[arg(long)]
        a_file: PathBuf,
        #[arg(long)]
        b_file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        v: f64,
        /// Explicit constants `m',m,M,M'` instead of the tight spectral ones.
        #[arg(long, value_delimiter = ',')]
        sandwich: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
    },
    Hs {
        #[arg(long)]
        a_file: PathBuf,
        #[arg(long)]
        b_file: PathBuf,
        #[arg(long)]
        x_file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        v: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
}
