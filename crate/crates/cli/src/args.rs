use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "secgap",
    version,
    about = "Secretary algorithms with a predicted additive gap: simulations, sweeps and guarantees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate competitive ratios, one CSV row per (k, sigma, algo, tau-policy) cell.
    Simulate(SimulateArgs),
    /// Sweep over k or sigma and emit a plotting-ready CSV.
    Sweep(SweepArgs),
    /// Evaluate a closed-form guarantee and print it as JSON.
    Bounds(BoundsArgs),
    /// Best worst-case consistency for a range of robustness targets.
    Frontier(FrontierArgs),
    /// Run the acceptance checks and print a pass/fail table.
    Verify(VerifyArgs),
    /// Export generated profiles as a replay file.
    Instances(InstancesArgs),
    /// Re-run the command recorded in a run manifest.
    Replay(ReplayArgs),
}

/// Flags shared by `simulate` and `sweep`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ExperimentArgs {
    /// Instance family: pareto, pareto-shape, exp, chisq or exp-superstar.
    #[arg(long, default_value = "pareto")]
    pub family: String,

    /// Degrees of freedom for the chi-squared family.
    #[arg(long, default_value_t = 10)]
    pub df: u32,

    /// Superstar multiplier for the exp-superstar family.
    #[arg(long, default_value_t = 100.0)]
    pub factor: f64,

    /// Use the profiles of a replay file instead of a generated family.
    #[arg(long, value_name = "PATH")]
    pub replay_file: Option<PathBuf>,

    #[arg(long, default_value_t = 200)]
    pub n: usize,

    #[arg(long, default_value_t = 5000)]
    pub iters: u64,

    /// Comma-separated: classical, strict-classical, exact-gap, bounded, robust, l-select.
    #[arg(long, value_delimiter = ',', default_value = "exact-gap")]
    pub algo: Vec<String>,

    /// Waiting time for the fixed policy and cap for the min policy.
    #[arg(long, default_value_t = 0.2)]
    pub tau: f64,

    /// Comma-separated: fixed, from-k, min.
    #[arg(long, value_delimiter = ',', default_value = "fixed")]
    pub tau_policy: Vec<String>,

    /// Shorthand for --tau-policy from-k.
    #[arg(long)]
    pub tau_from_k: bool,

    /// Length of the final classical phase of the robust rule.
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,

    /// Error bound of the bounded rule; its predictions get uniform noise of this half-width.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,

    /// Comma-separated gap indices, or `unknown` (requires --gap).
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<String>,

    /// Prediction multiplier: the algorithm sees sigma * c_k.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub sigma: Vec<f64>,

    /// Fixed gap value overriding sigma * c_k.
    #[arg(long)]
    pub gap: Option<f64>,

    /// Number of selections for l-select.
    #[arg(long = "L", visible_alias = "l", default_value_t = 2)]
    pub l: usize,

    #[arg(long, env = "SECGAP_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,

    /// Output CSV path (stdout when absent). A run manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub exp: ExperimentArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// `k` or `sigma`.
    #[arg(long)]
    pub sweep: String,

    #[arg(long)]
    pub from: f64,

    #[arg(long)]
    pub to: f64,

    #[arg(long)]
    pub step: f64,

    /// Waiting time of the classical baseline added to k-sweeps.
    #[arg(long, default_value_t = std::f64::consts::E.recip())]
    pub baseline_tau: f64,

    #[command(flatten)]
    pub exp: ExperimentArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    /// exact, rc, bounded, tie23 or lselect.
    #[arg(long)]
    pub which: String,

    /// Waiting time; defaults to tau_for_k(k) for exact and bounded.
    #[arg(long)]
    pub tau: Option<f64>,

    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long)]
    pub gamma: Option<f64>,

    /// Additive error for the bounded guarantee, in units of w1.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,

    /// Instance size for the finite-n tie probability.
    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long = "L", visible_alias = "l")]
    pub l: Option<usize>,

    /// w_L / OPT for the L-selection guarantee.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FrontierArgs {
    #[arg(long, default_value_t = 0.0)]
    pub r_from: f64,

    #[arg(long, default_value_t = 0.36)]
    pub r_to: f64,

    #[arg(long, default_value_t = 0.01)]
    pub r_step: f64,

    #[arg(long, default_value_t = 0.001)]
    pub grid_step: f64,

    /// Use a specific k instead of the worst case over k.
    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long)]
    pub threads: Option<usize>,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// bounds, oracle, figures, determinism or all.
    #[arg(long, default_value = "all")]
    pub suite: String,

    /// Reduced iteration counts.
    #[arg(long)]
    pub fast: bool,

    #[arg(long, env = "SECGAP_SEED", default_value_t = crate::checks::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InstancesArgs {
    #[arg(long, default_value = "pareto")]
    pub family: String,

    #[arg(long, default_value_t = 10)]
    pub df: u32,

    #[arg(long, default_value_t = 100.0)]
    pub factor: f64,

    #[arg(long, default_value_t = 200)]
    pub n: usize,

    /// Number of profiles; profile i is the one iteration i of a simulation draws.
    #[arg(long, default_value_t = 10)]
    pub count: u64,

    #[arg(long, env = "SECGAP_SEED", default_value_t = 1)]
    pub seed: u64,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written next to an earlier output.
    #[arg(long)]
    pub manifest: PathBuf,

    /// Write to this path instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
