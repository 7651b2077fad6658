//! The `socialnet` command line: load game configs and social range
//! matrices, run solvers and experiments, write JSON, CSV and DOT.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use socialnet_core::analysis::{LemmaId, UtilityFamily};
use socialnet_core::equilibrium::Method;
use socialnet_core::scalar::parse_rational;

pub use commands::run;

/// Exit status of a successful run, a failed check, or a dynamics outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failed = 1,
    CapExceeded = 2,
    Cycle = 3,
    Cutoff = 4,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug, Parser)]
#[command(name = "socialnet", version, about = "Perceived Nash equilibria in social network creation games")]
pub struct Cli {
    /// Reserved. Every algorithm is deterministic, so the value is ignored.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List every perceived equilibrium of a game.
    Enumerate(EnumerateArgs),
    /// Find the social optimum by brute force over all graphs.
    Optimum(OptimumArgs),
    /// Run best-response dynamics.
    Dynamics(DynamicsArgs),
    /// Run one of the experiments.
    Experiment(ExperimentArgs),
    /// Report archetypes, ignorant and ignored players, and colluding pairs of a matrix.
    Classify(ClassifyArgs),
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    /// Game config JSON.
    #[arg(long)]
    pub game: PathBuf,
    /// Social range matrix, JSON or CSV.
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub cap: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Report JSON; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// DOT file with the topology of the lowest-cost equilibrium.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exhaustive,
    EdgeDecomposition,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Exhaustive => Method::Exhaustive,
            MethodArg::EdgeDecomposition => Method::EdgeDecomposition,
        }
    }
}

#[derive(Debug, Args)]
pub struct OptimumArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long)]
    pub matrix: PathBuf,
    /// `empty`, or a purchase profile JSON file.
    #[arg(long, default_value = "empty")]
    pub start: String,
    /// `round-robin`, or a comma-separated player order naming every player.
    #[arg(long, default_value = "round-robin")]
    pub schedule: String,
    #[arg(long, default_value_t = 1000)]
    pub max_steps: usize,
    /// Trace JSON; standard output when omitted.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// DOT file with the final topology.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(subcommand)]
    pub kind: ExperimentKind,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentKind {
    /// Compare the selfish society with a monarchy against the closed forms.
    AnarchyMonarchy(AnarchyMonarchyArgs),
    /// Turn neutral relations into friendships.
    Windfall(FlipArgs),
    /// Turn neutral relations into ill-will.
    IllWill(FlipArgs),
    /// Check every equilibrium result over a parameter grid.
    VerifyLemmas(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// JSON with full profiles; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// One row per grid point.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnarchyMonarchyArgs {
    #[arg(long = "n", value_delimiter = ',', default_values_t = [2, 3, 4, 5, 6])]
    pub players: Vec<usize>,
    #[arg(long = "alpha", value_delimiter = ',', value_parser = rational, default_values = ["1/4", "1/2", "1", "3/2", "2", "3"])]
    pub alphas: Vec<Rational64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FlipArgs {
    /// Game config JSON; must be linear with R = 1.
    #[arg(long, conflicts_with_all = ["players", "alpha"])]
    pub game: Option<PathBuf>,
    /// Player count of a linear R = 1 game, used with `--alpha`.
    #[arg(long = "n", requires = "alpha")]
    pub players: Option<usize>,
    #[arg(long, value_parser = rational)]
    pub alpha: Option<Rational64>,
    /// Starting matrix; the identity when omitted.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Entry `i,j` to flip; repeat for several.
    #[arg(long = "flip", value_parser = pair)]
    pub flips: Vec<(usize, usize)>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Checks to run; all when omitted.
    #[arg(long = "lemma", value_delimiter = ',', value_parser = lemma)]
    pub lemmas: Vec<LemmaId>,
    #[arg(long = "n", value_delimiter = ',')]
    pub players: Vec<usize>,
    #[arg(long = "alpha", value_delimiter = ',', value_parser = rational)]
    pub alphas: Vec<Rational64>,
    #[arg(long = "radius", value_delimiter = ',')]
    pub radii: Vec<usize>,
    #[arg(long = "utility", value_delimiter = ',', value_parser = utility)]
    pub utilities: Vec<UtilityFamily>,
    /// Matrices drawn per grid point where a check samples.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn rational(s: &str) -> Result<Rational64, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `i,j`, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad player index `{t}`"));
    Ok((parse(a)?, parse(b)?))
}

fn lemma(s: &str) -> Result<LemmaId, String> {
    s.parse().map_err(|e: socialnet_core::Error| e.to_string())
}

fn utility(s: &str) -> Result<UtilityFamily, String> {
    s.parse().map_err(|e: socialnet_core::Error| e.to_string())
}
