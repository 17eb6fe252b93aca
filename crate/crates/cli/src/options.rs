use std::path::PathBuf;

use aoe_core::{Policy, SearchMode};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aoe", version, about = "Area-of-effectiveness maps for edge inference deployments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effectiveness, compute-load and activity rasters per policy.
    Maps(MapsArgs),
    /// Binary area-of-effectiveness rasters and area summary.
    Aoe(MapsArgs),
    /// Empirical CDFs of the compute-load and activity maps.
    Cdf(CdfArgs),
    /// Search model-to-AP assignments maximizing the genie AoE.
    Plan(PlanArgs),
    /// Check a scenario file and report its dimensions.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct Input {
    #[arg(long)]
    pub scenario: PathBuf,

    /// Replace the computed RSS of one AP with a CSV raster, as `<ap_id>=<path>`.
    #[arg(long = "rss", value_name = "AP=PATH", value_parser = parse_rss_import)]
    pub rss: Vec<(u32, PathBuf)>,

    /// Overrides the scenario's effectiveness threshold.
    #[arg(long = "q-th")]
    pub q_th: Option<f64>,

    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MapsArgs {
    #[command(flatten)]
    pub input: Input,

    #[arg(long, value_enum, default_value_t = PolicyArg::All)]
    pub policy: PolicyArg,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(flatten)]
    pub mc: MonteCarloArgs,
}

#[derive(Debug, Args)]
pub struct CdfArgs {
    #[command(flatten)]
    pub input: Input,

    #[arg(long, value_enum, default_value_t = PolicyArg::All)]
    pub policy: PolicyArg,

    /// Drop pixels with zero cost (uncovered locations) before building the CDF.
    #[arg(long)]
    pub exclude_zero_cost: bool,

    #[command(flatten)]
    pub mc: MonteCarloArgs,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub input: Input,

    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    pub mode: ModeArg,

    /// Restrict the candidates of one AP, as `<ap_id>=<model>[,<model>...]`.
    #[arg(long = "candidates", value_name = "AP=MODELS", value_parser = parse_candidates)]
    pub candidates: Vec<(u32, Vec<String>)>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    /// Cross-check the genie maps against the sampling oracle.
    #[arg(long)]
    pub mc: bool,

    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Rss,
    #[value(name = "best_model")]
    BestModel,
    Genie,
    All,
}

impl PolicyArg {
    pub fn policies(self) -> Vec<Policy> {
        match self {
            PolicyArg::Rss => vec![Policy::Rss],
            PolicyArg::BestModel => vec![Policy::BestModel],
            PolicyArg::Genie => vec![Policy::Genie],
            PolicyArg::All => Policy::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pgm,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn pgm(self) -> bool {
        matches!(self, Format::Pgm | Format::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Greedy,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exhaustive => SearchMode::Exhaustive,
            ModeArg::Greedy => SearchMode::Greedy,
        }
    }
}

fn parse_rss_import(s: &str) -> Result<(u32, PathBuf), String> {
    let (id, path) = s.split_once('=').ok_or("expected <ap_id>=<path>")?;
    let id = id.trim().parse().map_err(|e| format!("bad AP id {id:?}: {e}"))?;
    Ok((id, PathBuf::from(path)))
}

fn parse_candidates(s: &str) -> Result<(u32, Vec<String>), String> {
    let (id, models) = s.split_once('=').ok_or("expected <ap_id>=<model>[,<model>...]")?;
    let id = id.trim().parse().map_err(|e| format!("bad AP id {id:?}: {e}"))?;
    Ok((id, models.split(',').map(|m| m.trim().to_string()).collect()))
}
