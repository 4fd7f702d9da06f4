use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "modent",
    version,
    about = "Exact ground-state entanglement of modular XX spin chains"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct GlobalArgs {
    /// JSON or TOML file with the same keys as the flags; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file (output directory for `fig`). Without it results go to
    /// stdout, or into the default output directory when one is set.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Default output directory.
    #[arg(long, global = true, env = "MODENT_OUT_DIR", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A modular chain or an explicit coupling list.
#[derive(Args, Debug, Default, Clone)]
pub struct ChainArgs {
    /// Number of moduli N.
    #[arg(long)]
    pub moduli: Option<usize>,
    /// Sites per modulus n.
    #[arg(long)]
    pub sites: Option<usize>,
    /// End bond λ inside each modulus.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Inter-modulus coupling λ_I.
    #[arg(long = "lambda-i")]
    pub lambda_i: Option<f64>,
    /// Comma-separated nearest-neighbour couplings J_{i,i+1}.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with_all = ["moduli", "sites", "lambda", "lambda_i"]
    )]
    pub couplings: Option<Vec<f64>>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct BaseArgs {
    #[arg(long)]
    pub moduli: Option<usize>,
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Entanglement report for one chain.
    #[command(allow_negative_numbers = true)]
    Report {
        #[command(flatten)]
        chain: ChainArgs,
        /// Site (0-based) for the residual tangle.
        #[arg(long)]
        tangle_site: Option<usize>,
    },
    /// Single-particle spectrum.
    #[command(allow_negative_numbers = true)]
    Spectrum {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Scan the inter-modulus coupling (default N = 2, grid 0..2 step 0.01).
    #[command(allow_negative_numbers = true)]
    SweepLambdaI {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Scan the number of moduli from 1 to --max-moduli (default 20).
    #[command(allow_negative_numbers = true)]
    SweepModuli {
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long = "lambda-i")]
        lambda_i: Option<f64>,
        #[arg(long)]
        max_moduli: Option<usize>,
        /// |C(N_max) - C(N_max - 1)| below this counts as converged.
        #[arg(long)]
        asymptote_tol: Option<f64>,
    },
    /// Onset coupling λ_I^th of end-to-end entanglement (default N = 2).
    #[command(allow_negative_numbers = true)]
    Threshold {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        scan_step: Option<f64>,
        #[arg(long)]
        scan_max: Option<f64>,
        /// Concurrence above this counts as entangled.
        #[arg(long)]
        onset_tol: Option<f64>,
        #[arg(long)]
        bracket_width: Option<f64>,
    },
    /// Energy gap against the number of moduli.
    #[command(allow_negative_numbers = true)]
    GapScan {
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long = "lambda-i")]
        lambda_i: Option<f64>,
        #[arg(long)]
        min_moduli: Option<usize>,
        #[arg(long)]
        max_moduli: Option<usize>,
    },
    /// Compare the fermion solver with exact diagonalization on a grid of
    /// small chains; exits with status 3 on any mismatch.
    OracleCheck {
        #[arg(long)]
        max_sites: Option<usize>,
        #[arg(long)]
        energy_tol: Option<f64>,
        #[arg(long)]
        state_tol: Option<f64>,
    },
    /// Regenerate the data behind one figure.
    Fig {
        #[arg(value_enum)]
        name: FigName,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Report { .. } => "report",
            Command::Spectrum { .. } => "spectrum",
            Command::SweepLambdaI { .. } => "sweep-lambda-i",
            Command::SweepModuli { .. } => "sweep-moduli",
            Command::Threshold { .. } => "threshold",
            Command::GapScan { .. } => "gap-scan",
            Command::OracleCheck { .. } => "oracle-check",
            Command::Fig { .. } => "fig",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigName {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}
