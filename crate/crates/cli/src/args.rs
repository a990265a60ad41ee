use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Every flag can also be set through `RAN_SLICE_OPT_<FLAG>`.
#[derive(Parser, Debug)]
#[command(name = "ran-slice-opt", version, about = "Placement of RAN function chains for network slices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one slice count (optionally replicated) and write all outputs.
    Run(RunArgs),
    /// Solve a range of slice counts and write aggregated plot data.
    Sweep(SweepArgs),
    /// Check a placement document against a scenario.
    Validate(ValidateArgs),
    /// Write the linear model of a scenario in fixed MPS format.
    ExportMps(ExportArgs),
    /// Write the generated reference topology as JSON.
    GenTopology(GenTopologyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Exact,
    Heuristic,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProfileChoice {
    /// Builtin link delays and NF constants.
    Standard,
    /// Longer access/ring links and larger fixed processing delays.
    Calibrated,
}

impl ProfileChoice {
    pub fn name(self) -> &'static str {
        match self {
            ProfileChoice::Standard => "standard",
            ProfileChoice::Calibrated => "calibrated",
        }
    }
}

/// Scenario generation and solver settings shared by `run` and `sweep`.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "both", env = "RAN_SLICE_OPT_SOLVER")]
    pub solver: SolverChoice,
    /// Seed of replication 0; replication i uses seed + i.
    #[arg(long, default_value_t = 1, env = "RAN_SLICE_OPT_SEED")]
    pub seed: u64,
    #[arg(long, default_value_t = 0.98, env = "RAN_SLICE_OPT_ALPHA")]
    pub alpha: f64,
    /// Exact solver wall-time limit per instance, seconds.
    #[arg(long, default_value_t = 600.0, env = "RAN_SLICE_OPT_TIME_LIMIT")]
    pub time_limit: f64,
    /// Relative optimality gap at which the exact solver may stop.
    #[arg(long, default_value_t = 0.0, env = "RAN_SLICE_OPT_GAP")]
    pub gap: f64,
    #[arg(long, value_enum, default_value = "calibrated", env = "RAN_SLICE_OPT_PROFILE")]
    pub profile: ProfileChoice,
    /// Multiplier on catalog bandwidths.
    #[arg(long, default_value_t = 1e-3, env = "RAN_SLICE_OPT_DEMAND_SCALE")]
    pub demand_scale: f64,
    #[arg(long, default_value_t = 3, env = "RAN_SLICE_OPT_K_PATHS")]
    pub k_paths: usize,
    #[arg(long, default_value_t = 1, env = "RAN_SLICE_OPT_DEMANDS_PER_SLICE")]
    pub demands_per_slice: usize,
    /// Topology JSON; the reference topology is generated when absent.
    #[arg(long, env = "RAN_SLICE_OPT_TOPOLOGY")]
    pub topology: Option<PathBuf>,
    /// Seed of the generated reference topology.
    #[arg(long, default_value_t = 1, env = "RAN_SLICE_OPT_TOPOLOGY_SEED")]
    pub topology_seed: u64,
    #[arg(long, default_value_t = 0.95, env = "RAN_SLICE_OPT_CONFIDENCE")]
    pub confidence: f64,
    #[arg(long, default_value = "out", env = "RAN_SLICE_OPT_OUTPUT_DIR")]
    pub output_dir: PathBuf,
    /// Write runtimes as 0 so repeated runs give identical bytes.
    #[arg(long, env = "RAN_SLICE_OPT_DETERMINISTIC_OUTPUT")]
    pub deterministic_output: bool,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, default_value_t = 5, env = "RAN_SLICE_OPT_SLICES")]
    pub slices: usize,
    #[arg(long, default_value_t = 1, env = "RAN_SLICE_OPT_REPLICATIONS")]
    pub replications: usize,
    /// Scenario JSON; overrides the generator flags.
    #[arg(long, env = "RAN_SLICE_OPT_SCENARIO")]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Slice counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25,30,35,40,45,50", env = "RAN_SLICE_OPT_COUNTS")]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 10, env = "RAN_SLICE_OPT_REPLICATIONS")]
    pub replications: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long, env = "RAN_SLICE_OPT_PLACEMENT")]
    pub placement: PathBuf,
    #[arg(long, env = "RAN_SLICE_OPT_SCENARIO")]
    pub scenario: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// Scenario JSON; when absent a scenario is generated from the flags below.
    #[arg(long, env = "RAN_SLICE_OPT_SCENARIO")]
    pub scenario: Option<PathBuf>,
    #[arg(long, env = "RAN_SLICE_OPT_OUT")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5, env = "RAN_SLICE_OPT_SLICES")]
    pub slices: usize,
    #[arg(long, default_value_t = 1, env = "RAN_SLICE_OPT_SEED")]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "calibrated", env = "RAN_SLICE_OPT_PROFILE")]
    pub profile: ProfileChoice,
    #[arg(long, default_value_t = 1e-3, env = "RAN_SLICE_OPT_DEMAND_SCALE")]
    pub demand_scale: f64,
    #[arg(long, default_value_t = 1, env = "RAN_SLICE_OPT_TOPOLOGY_SEED")]
    pub topology_seed: u64,
}

#[derive(Args, Debug)]
pub struct GenTopologyArgs {
    #[arg(long, default_value_t = 1, env = "RAN_SLICE_OPT_SEED")]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "calibrated", env = "RAN_SLICE_OPT_PROFILE")]
    pub profile: ProfileChoice,
    /// Output file; stdout when absent.
    #[arg(long, env = "RAN_SLICE_OPT_OUT")]
    pub out: Option<PathBuf>,
}
