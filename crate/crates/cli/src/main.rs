//! `svcal`: pricing, calibration, smiles and validation from the shell.
//!
//! Data goes to files under `--output-dir`; diagnostics go to stderr.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use svcal_core::model::ModelKind;

#[derive(Debug, Parser)]
#[command(
    name = "svcal",
    version,
    about = "Stochastic volatility pricing and calibration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price a strike x maturity grid or the quotes of a chain file.
    Price(GridArgs),
    /// Staged calibration: Heston first, then SVJ and MSV from its optimum.
    Calibrate(CalibrateArgs),
    /// Market and model implied vols, one CSV per maturity.
    Smile(CalibrateArgs),
    /// Mean relative pricing error by maturity and model.
    Mre(CalibrateArgs),
    /// Riccati, Monte Carlo and reduction checks.
    Validate(ValidateArgs),
    /// Write a model-generated chain file.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelSel {
    Heston,
    Svj,
    Msv,
    All,
}

impl ModelSel {
    pub fn kinds(self) -> Vec<ModelKind> {
        match self {
            ModelSel::Heston => vec![ModelKind::Heston],
            ModelSel::Svj => vec![ModelKind::Svj],
            ModelSel::Msv => vec![ModelKind::Msv],
            ModelSel::All => ModelKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Chain CSV file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Defaults to all models, or heston for synth.
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelSel>,
    /// Parameter file; repeat to give one per model.
    #[arg(long, global = true)]
    pub params: Vec<PathBuf>,
    /// Monte Carlo seed for validate, noise seed for synth.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub phi_max: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub inner_nodes: Option<usize>,
    #[arg(long, global = true)]
    pub outer_nodes: Option<usize>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub steps_per_year: Option<usize>,
    /// Flat rate for chain files without a rate column.
    #[arg(long, global = true)]
    pub rate: Option<f64>,
}

impl Common {
    pub fn kinds(&self) -> Vec<ModelKind> {
        self.model.unwrap_or(ModelSel::All).kinds()
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 100.0)]
    pub spot: f64,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "80,85,90,95,100,105,110,115,120"
    )]
    pub strikes: Vec<f64>,
    /// Maturities in days.
    #[arg(long, value_delimiter = ',', default_value = "30,60,90,120,180")]
    pub maturities: Vec<i64>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long, default_value_t = 0.75)]
    pub moneyness_lo: f64,
    #[arg(long, default_value_t = 1.25)]
    pub moneyness_hi: f64,
    /// Shortest maturity kept, in days.
    #[arg(long, default_value_t = 30)]
    pub tau_lo: i64,
    /// Longest maturity kept, in days.
    #[arg(long, default_value_t = 180)]
    pub tau_hi: i64,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long, default_value_t = 400)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Scales every tolerance; used to exercise the failure path.
    #[arg(long, hide = true, default_value_t = 1.0)]
    pub tolerance_scale: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Standard deviation of additive price noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    /// File name inside the output directory.
    #[arg(long, default_value = "chain.csv")]
    pub output: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit::code_for(&e);
            log::error!("{e:#}");
            ExitCode::from(code)
        }
    }
}
