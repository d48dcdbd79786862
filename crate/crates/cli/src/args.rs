use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monotile::params::Mode;

#[derive(Parser, Debug)]
#[command(name = "monotile", version, about = "Monochromatic tilings of edge-coloured complete graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a colouring of K_n.
    Gen(GenArgs),
    /// Tile a colouring and write the tiling JSON.
    Tile(TileArgs),
    /// Check a tiling against a colouring; exit 1 on failure.
    Verify(VerifyArgs),
    /// Exact minimum tiling of a small colouring, or a sweep over colourings, as CSV.
    Oracle(OracleArgs),
    /// Tile many seeded colourings and compare sizes with the greedy bound.
    Bench(BenchArgs),
    /// Reshape a bench CSV into one row per series and n.
    PlotData(PlotArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Uniform,
    Single,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Colouring file (text or JSON); without it one is generated from --n, --r, --seed.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = GenKind::Uniform)]
    pub generator: GenKind,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = GenKind::Uniform)]
    pub generator: GenKind,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TileArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Sequence family: path, matching, caterpillar, blocky, random (optionally `:D=<Δ>:seed=<s>`).
    #[arg(long, default_value = "path")]
    pub spec: String,
    /// Maximum degree for families that take one.
    #[arg(long)]
    pub delta: Option<usize>,
    #[arg(long, default_value_t = Mode::Practical)]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Node budget per subgraph search.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub colouring: PathBuf,
    #[arg(long)]
    pub tiling: PathBuf,
    /// Overrides the spec recorded in the tiling file.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long)]
    pub delta: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnumKind {
    All,
    Sampled,
    Single,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value = "path")]
    pub spec: String,
    #[arg(long)]
    pub delta: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub budget: Option<u64>,
    /// Sweep every n up to this value instead of solving one instance.
    #[arg(long)]
    pub sweep: Option<usize>,
    #[arg(long, value_enum, default_value_t = EnumKind::All)]
    pub enumerate: EnumKind,
    /// Colourings per n for `--enumerate sampled`.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Sizes: `400`, `50..400` (stepped by --step) or `50,100,200`.
    #[arg(long, value_parser = parse_list)]
    pub n: NumList,
    #[arg(long, default_value_t = 50)]
    pub step: usize,
    #[arg(long, value_parser = parse_list, default_value = "2")]
    pub r: NumList,
    /// Maximum degrees for families that take one; fixed families use their own.
    #[arg(long, value_parser = parse_list)]
    pub delta: Option<NumList>,
    #[arg(long, default_value = "path")]
    pub spec: String,
    /// Seeds `0..seeds` per size.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = Mode::Practical)]
    pub mode: Mode,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Bench CSV.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NumList {
    Range(RangeInclusive<usize>),
    Items(Vec<usize>),
}

impl NumList {
    pub fn values(&self, step: usize) -> Vec<usize> {
        match self {
            NumList::Range(r) => r.clone().step_by(step.max(1)).collect(),
            NumList::Items(v) => v.clone(),
        }
    }
}

pub fn parse_list(s: &str) -> Result<NumList, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        return Ok(NumList::Range(a..=b));
    }
    s.split(',').map(num).collect::<Result<Vec<_>, _>>().map(NumList::Items)
}
