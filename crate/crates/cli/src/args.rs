use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ModelKind;

#[derive(Debug, Parser)]
#[command(
    name = "fracdml",
    version,
    about = "Fractional-order denatured Morris-Lecar neurons: simulation, equilibria and bifurcation thresholds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(CommonArgs),
    /// List the equilibria at the given current.
    Equilibria(CommonArgs),
    /// Trace, determinant, classification and β* at each equilibrium.
    Stability(CommonArgs),
    /// Print the Hopf threshold β* at the given current.
    BetaStar(CommonArgs),
    /// Warm-started continuation in the order, recording tail samples.
    Sweep(CommonArgs),
    /// β* as a function of the current.
    HopfCurve(CommonArgs),
    /// Check the solver against the Mittag-Leffler reference solution.
    Validate(CommonArgs),
    /// Print the resolved configuration as JSON.
    Config(CommonArgs),
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Equilibria(a)
            | Command::Stability(a)
            | Command::BetaStar(a)
            | Command::Sweep(a)
            | Command::HopfCurve(a)
            | Command::Validate(a)
            | Command::Config(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// External current.
    #[arg(long = "I", allow_negative_numbers = true)]
    pub i: Option<f64>,
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Fractional order in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Linear coupling strength.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Sigmoidal coupling strength.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Synaptic reversal potential.
    #[arg(long, allow_negative_numbers = true)]
    pub vs: Option<f64>,
    /// Synaptic slope.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Synaptic threshold.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Step size.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Samples dropped as transient.
    #[arg(long)]
    pub discard: Option<usize>,
    /// Samples kept for tail statistics.
    #[arg(long)]
    pub tail: Option<usize>,
    #[arg(long)]
    pub beta_from: Option<f64>,
    #[arg(long)]
    pub beta_to: Option<f64>,
    #[arg(long)]
    pub beta_step: Option<f64>,
    #[arg(long = "I-from", allow_negative_numbers = true)]
    pub i_from: Option<f64>,
    #[arg(long = "I-to", allow_negative_numbers = true)]
    pub i_to: Option<f64>,
    #[arg(long = "I-points")]
    pub i_points: Option<usize>,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub y0: Option<Vec<f64>>,
    /// Use FFT-accelerated history sums.
    #[arg(long)]
    pub fft: bool,
    /// Output file (CSV); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot next to the output file.
    #[arg(long)]
    pub svg: bool,
}
