mod commands;
mod grid;
mod output;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "defect-perc", version, about = "Bond percolation with a defect plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Microcanonical crossing curves, one file per (p, L).
    Sweep(SweepArgs),
    /// Binomial convolution of microcanonical curves onto a density grid.
    Convolve(ConvolveArgs),
    /// Crossing-point estimate of sigma*(p) from canonical curves.
    Estimate(EstimateArgs),
    /// Origin-cluster size distribution and decay-regime fit.
    ClusterDist(ClusterArgs),
    /// Bridge mean-field approximation of sigma*(p).
    Meanfield(MeanFieldArgs),
    /// Exact animal census, identity and supermultiplicativity audits.
    Animals(AnimalArgs),
    /// Numerical check of the ghost-field differential inequalities.
    AuditIneq(AuditArgs),
    /// Homogeneous crossing curves and the bulk threshold estimate.
    Homog(HomogArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Base seed; realization streams derive from it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, default_value_t = output::default_workers())]
    pub workers: usize,
    /// Output directory.
    #[arg(long, env = "DEFECT_PERC_OUT", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub s: usize,
    /// Box half-sides, comma separated.
    #[arg(long = "L", value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Bulk densities, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub p: Vec<f64>,
    #[arg(long)]
    pub realizations: u64,
    /// Test every vertical face pair instead of A_1 / A_-1 only.
    #[arg(long)]
    pub all_faces: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ConvolveArgs {
    /// Microcanonical curve files.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// `lo:hi:step` or a comma-separated list.
    #[arg(long)]
    pub sigma_grid: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, env = "DEFECT_PERC_OUT", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Canonical curve files (JSON), any number of bulk densities.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Accept curves from different run configurations.
    #[arg(long)]
    pub force: bool,
    #[arg(long, env = "DEFECT_PERC_OUT", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub s: usize,
    /// Half-side of the box the clusters grow in.
    #[arg(long = "N", alias = "L")]
    pub half_side: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub samples: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct MeanFieldArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub s: usize,
    /// Critical density of the defect lattice.
    #[arg(long, default_value_t = 0.5)]
    pub sigma_c: f64,
    /// `lo:hi:step` or a comma-separated list.
    #[arg(long, default_value = "0:0.3:0.01")]
    pub p_grid: String,
    #[arg(long, env = "DEFECT_PERC_OUT", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AnimalArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub s: usize,
    /// Edge cap; defaults to the per-dimension default.
    #[arg(long)]
    pub max_edges: Option<usize>,
    /// Allow caps above the default.
    #[arg(long)]
    pub force: bool,
    /// Evaluate exact cluster-size probabilities at this bulk density.
    #[arg(long, requires = "sigma")]
    pub p: Option<f64>,
    #[arg(long, requires = "p")]
    pub sigma: Option<f64>,
    #[arg(long, env = "DEFECT_PERC_OUT", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long = "N", alias = "L")]
    pub half_side: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Finite-difference step.
    #[arg(long, default_value_t = defect_perc::observables::DEFAULT_STEP)]
    pub step: f64,
    /// Samples per stencil point.
    #[arg(long)]
    pub samples: u64,
    #[arg(long, default_value_t = defect_perc::observables::DEFAULT_BATCHES)]
    pub batches: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct HomogArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long = "L", value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub realizations: u64,
    /// Bond-density grid for the canonical curves.
    #[arg(long, default_value = "0.2:0.3:0.002")]
    pub p_grid: String,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(a) => commands::sweep(&a),
        Command::Convolve(a) => commands::convolve(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::ClusterDist(a) => commands::cluster_dist(&a),
        Command::Meanfield(a) => commands::meanfield(&a),
        Command::Animals(a) => commands::animals(&a),
        Command::AuditIneq(a) => commands::audit_ineq(&a),
        Command::Homog(a) => commands::homog(&a),
    }
}
