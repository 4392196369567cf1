//! Argument surface of the `pilot` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Top-level arguments; the flags apply to every subcommand.
#[derive(Debug, Parser)]
#[command(
    name = "pilot",
    version,
    about = "Trains navigation policies, quantizes the best survivor, and maps it onto accelerator designs"
)]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to the configuration's `output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Base RNG seed; defaults to the configured hyperparameter seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker count for training and design sweeps; defaults to the CPU count.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Quantization error tolerance; defaults to the configured value.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one policy per configured network variant.
    Train,
    /// Roll out every trained policy greedily and tabulate success rates.
    Evaluate,
    /// Drop policies whose success rate falls below the configured threshold.
    Filter,
    /// Normalize and quantize the best surviving policy, narrowest precision first.
    Quantize,
    /// Run the deployed network through the cycle-level simulator on one design.
    Simulate {
        /// Processing-element count of the design to simulate.
        #[arg(long, default_value_t = 8)]
        pes: u32,
        /// MAC lanes per processing element.
        #[arg(long, default_value_t = 16)]
        lanes: u32,
    },
    /// Sweep the accelerator grid and write the results table and plots.
    Dse,
    /// Run every stage in order and capture the run in a manifest.
    Pipeline {
        /// Replay a previous run from its manifest instead of a fresh config.
        #[arg(long, value_name = "PATH")]
        from_manifest: Option<PathBuf>,
    },
    /// Summarize sweep results into the final design recommendation.
    Report,
}
