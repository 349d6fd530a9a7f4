use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "partmech",
    version,
    about = "Revenue-optimal partition mechanisms for an additive buyer"
)]
pub struct Cli {
    /// Cap on solver worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Write a generated instance as JSON.
    Gen(GenArgs),
    /// Solve an instance and report the best partition mechanism found.
    Solve(SolveArgs),
    /// Evaluate a partition mechanism (or, with --menu, a choose-one menu).
    Eval(EvalArgs),
    /// Tabulate srev, brev and partition revenue across instances as CSV.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    TwoBundles,
    HartNisan,
    TwoGap,
    #[value(name = "3dm")]
    ThreeDm,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Ptas,
}

#[derive(Debug, Clone, Args)]
pub struct RandomArgs {
    /// Number of items (random), or the perfect-square size parameter (two-gap).
    #[arg(long)]
    pub n: Option<u64>,
    /// Largest support size of a random item.
    #[arg(long, default_value_t = 3)]
    pub max_support: usize,
    /// Random item values are integers in 0..=value-bound.
    #[arg(long, default_value_t = 10)]
    pub value_bound: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    pub family: Family,
    #[command(flatten)]
    pub random: RandomArgs,
    /// Hyperedges for 3dm, as "x,y,z;x,y,z;...".
    #[arg(long)]
    pub edges: Option<String>,
    /// Instance output path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Gadget metadata path for 3dm (default: next to --out, with a .meta.json suffix).
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PtasArgs {
    #[arg(long, default_value = "1/4")]
    pub eps: String,
    #[arg(long, default_value = "1/2")]
    pub delta: String,
    #[arg(long, default_value_t = 3)]
    pub ell_max: usize,
    #[arg(long, default_value_t = 3)]
    pub grid_levels: u32,
    /// Low-value cutoff exponent p in eps^p * pi (1 or 2).
    #[arg(long, default_value_t = 2)]
    pub low_exp: u32,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,
    #[command(flatten)]
    pub ptas: PtasArgs,
    /// Largest instance the exact oracle accepts.
    #[arg(long, default_value_t = partmech::exact::DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Largest support any exact bundle-sum distribution may reach.
    #[arg(long, default_value_t = partmech::dist::DEFAULT_SUPPORT_CAP)]
    pub support_cap: usize,
    /// Mechanism output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report output path (the report is always printed to stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    pub instance: PathBuf,
    /// Mechanism file, or a menu file with --menu.
    pub mechanism: PathBuf,
    #[arg(long)]
    pub menu: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Instance files; each becomes one row.
    pub instances: Vec<PathBuf>,
    /// Generated family to sweep in addition to the files.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Sizes for the two-gap sweep, comma separated.
    #[arg(long, default_value = "4,9,16")]
    pub sizes: String,
    /// Number of random instances (seeds seed, seed+1, ...).
    #[arg(long, default_value_t = 10)]
    pub count: u64,
    #[command(flatten)]
    pub random: RandomArgs,
    /// Comma-separated subset of exact, ptas, lower.
    #[arg(long, default_value = "exact,ptas,lower")]
    pub methods: String,
    #[command(flatten)]
    pub ptas: PtasArgs,
    #[arg(long, default_value_t = partmech::exact::DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Largest support any exact bundle-sum distribution may reach.
    #[arg(long, default_value_t = partmech::dist::DEFAULT_SUPPORT_CAP)]
    pub support_cap: usize,
    /// CSV output path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
