use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "ro-ac0",
    version,
    about = "Fourier growth, branching programs and pseudorandom restrictions for read-once AC0"
)]
pub struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, env = "RO_AC0_JOBS", default_value_t = 0)]
    pub jobs: usize,

    /// Directory for data files and the `run.json` manifest. Without it the
    /// JSON report goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Master seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Size, depth and exact acceptance probability of each circuit.
    Describe(InputArgs),
    /// Level masses, signed level sums and the main inequalities.
    Fourier(FourierArgs),
    /// Inequality reports: main bound, damped-mass sandwich, gap routes.
    Bounds(BoundsArgs),
    /// Branching-program conversion and checks.
    Bp(BpArgs),
    /// Fooling error of a generator against each circuit.
    Prg(PrgArgs),
    /// Sandwiching approximators under random restrictions.
    Shrink(ShrinkArgs),
    /// Timing table for the core routines.
    Bench(BenchArgs),
}

/// Where circuits come from: a DSL file or a generator spec.
#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct InputArgs {
    /// File with one formula, or one formula per line (`#` starts a comment).
    #[arg(long, conflicts_with = "corpus")]
    pub circuit: Option<PathBuf>,

    /// Generator spec, e.g. `random:n=64,d=3,count=500,seed=9`,
    /// `tribes:m=4,w=3`, `rtribes:fanins=2x3x2`, `and:k=5`, `or:k=5`.
    /// Ranges such as `n=4..14` cycle through their values.
    #[arg(long)]
    pub corpus: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FourierArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Error term of the main bound; defaults to 1/n.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Error term of the main bound; defaults to 1/n.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Damping values for the sandwich and gap checks (repeatable); the
    /// default is the largest value the main bound admits.
    #[arg(long = "p", allow_negative_numbers = true)]
    pub p: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BpArgs {
    #[command(subcommand)]
    pub action: BpAction,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BpAction {
    /// Convert each circuit and emit the program as JSON.
    Convert(InputArgs),
    /// Run a program (from JSON or converted from a circuit) on one input.
    Evaluate(EvaluateArgs),
    /// Compare program and circuit on every input (n <= 16) or on samples.
    CheckEquivalence(EquivalenceArgs),
    /// Build and verify the formula for one slice of the program.
    SliceWitness(WitnessArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Program JSON as written by `bp convert`.
    #[arg(long, conflicts_with_all = ["circuit", "corpus"])]
    pub program: Option<PathBuf>,

    /// Input bits, `x_0` first.
    #[arg(long)]
    pub x: String,

    /// Start state (1-based).
    #[arg(long, default_value_t = 1)]
    pub start: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EquivalenceArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Random inputs to try when n > 16.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// First edge layer of the slice (1-based).
    #[arg(long)]
    pub i: usize,

    /// Last edge layer of the slice (inclusive).
    #[arg(long)]
    pub j: usize,

    /// Entry state (1-based).
    #[arg(long)]
    pub d1: usize,

    /// Exit state (1-based).
    #[arg(long)]
    pub d2: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrgMode {
    Smallbias,
    Restriction,
    Uniform,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutArg {
    /// Separately seeded selection and assignment blocks.
    Independent,
    /// One block per round.
    Joint,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PrgArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum, default_value_t = PrgMode::Smallbias)]
    pub mode: PrgMode,

    /// Field degree of every small-bias block; defaults to ⌈log₂(n/eps)⌉.
    #[arg(long)]
    pub ell: Option<u32>,

    /// Degree of the fallback block of the restriction generator.
    #[arg(long)]
    pub ell_final: Option<u32>,

    /// Selection exponent of the restriction generator.
    #[arg(long, default_value_t = 1)]
    pub a: u32,

    /// Rounds of the restriction generator; defaults to
    /// ⌈2^a (2 log₂ n + log₂(1/eps))⌉.
    #[arg(long)]
    pub rounds: Option<usize>,

    #[arg(long, value_enum, default_value_t = LayoutArg::Independent)]
    pub layout: LayoutArg,

    /// Target error used for the default parameters; defaults to 1/n.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Monte-Carlo seeds when not enumerating.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,

    /// Enumerate every seed instead of sampling.
    #[arg(long)]
    pub exhaustive: bool,

    /// Fail when the measured error exceeds this value.
    #[arg(long)]
    pub max_error: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ShrinkArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Free probability; defaults to 1/(4 (log₂ n)^{D-1}), or to the largest
    /// admissible value with `--collapse`.
    #[arg(long)]
    pub p: Option<f64>,

    /// Sandwich parameter; defaults to min(1/n, 1/4), or 1/(2n) with
    /// `--collapse`.
    #[arg(long)]
    pub eps: Option<f64>,

    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,

    /// `c` in the size threshold `c (log₂ n)^D`.
    #[arg(long, default_value_t = 50.0)]
    pub threshold_scale: f64,

    /// Random inputs for the ordering check when n > 16.
    #[arg(long, default_value_t = 10_000)]
    pub ordering_samples: u64,

    /// Measure the collapse probability of the circuit itself instead.
    #[arg(long)]
    pub collapse: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BenchArgs {
    /// Largest n for the Walsh–Hadamard sweep.
    #[arg(long, default_value_t = 20)]
    pub max_n: usize,

    /// Leaves of the formula used for the recursion timing.
    #[arg(long, default_value_t = 100_000)]
    pub leaves: usize,

    /// Restrictions sampled for the Monte-Carlo timing.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}
