use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use range_median::harness::{self, Grid};
use range_median::SelectionStrategy;

#[derive(Parser, Debug)]
#[command(
    name = "rangemed",
    version,
    about = "Online range selection and median filtering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Answer range selection queries, printing each answer as soon as it is read.
    ///
    /// A query `L R p` asks for the element of rank p among positions L..=R
    /// (1-based). Without p it asks for the lower median, rank ceil((R-L+1)/2).
    /// Equal values are ordered by position. Answers are printed as
    /// `value<TAB>position`.
    Query(QueryArgs),
    /// Run an instrumented benchmark grid and write CSV plus a gnuplot data file.
    Bench(BenchArgs),
    /// Median-filter a binary PGM image.
    Filter(FilterArgs),
    /// Write seeded random inputs for the other commands.
    Gen(GenArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    Cascade,
    Compact,
    Dynamic,
    Oracle,
}

impl From<Structure> for harness::Structure {
    fn from(s: Structure) -> Self {
        match s {
            Structure::Cascade => harness::Structure::Cascade,
            Structure::Compact => harness::Structure::Compact,
            Structure::Dynamic => harness::Structure::Dynamic,
            Structure::Oracle => harness::Structure::Oracle,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Lazy,
    Eager,
}

impl From<Mode> for harness::Mode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Lazy => harness::Mode::Lazy,
            Mode::Eager => harness::Mode::Eager,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Median of medians.
    Deterministic,
    /// Quickselect with seeded pivots.
    Randomized,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Common {
    #[arg(long, value_enum, default_value = "randomized")]
    pub strategy: Strategy,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Common {
    pub fn selection(&self) -> SelectionStrategy {
        match self.strategy {
            Strategy::Deterministic => SelectionStrategy::Deterministic,
            Strategy::Randomized => SelectionStrategy::Randomized { seed: self.seed },
        }
    }
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    /// `dynamic` expects an operation stream, the others an array followed by queries.
    #[arg(long, value_enum, default_value = "cascade")]
    pub structure: Structure,
    #[arg(long, value_enum, default_value = "lazy")]
    pub mode: Mode,
    #[command(flatten)]
    pub common: Common,
    /// Input file; standard input when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "cascade")]
    pub structure: Structure,
    #[arg(long, value_enum, default_value = "lazy")]
    pub mode: Mode,
    #[command(flatten)]
    pub common: Common,
    /// Grid such as `n=2^10:2^16,k=1/64/n` (a:b doubles, a:b:f multiplies by f, `/` lists).
    #[arg(long, value_parser = parse_grid, default_value = "n=2^10:2^14,k=0/16/256")]
    pub grid: Grid,
    /// Repetitions per cell; the fastest is reported.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// CSV output; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// gnuplot data file; defaults to the CSV path with a `.dat` extension,
    /// or `bench.dat` when the CSV goes to standard output.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Run repetitions one after another.
    #[arg(long)]
    pub sequential: bool,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse()
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterStructure {
    Dynamic,
    Oracle,
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    /// `oracle` sorts every window directly.
    #[arg(long, value_enum, default_value = "dynamic")]
    pub structure: FilterStructure,
    #[arg(long)]
    pub radius: usize,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Filter tiles one after another.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    /// Array plus query lines.
    Static,
    /// Insert/delete/query operation stream.
    Ops,
    /// Binary PGM image.
    Image,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Array length.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Number of queries.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Give every query an explicit random rank instead of the median.
    #[arg(long)]
    pub random_ranks: bool,
    /// Number of operations in a stream.
    #[arg(long, default_value_t = 1000)]
    pub ops: usize,
    /// Values are drawn from `0..range`.
    #[arg(long, default_value_t = 1_000_000)]
    pub range: i64,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long, default_value_t = 255)]
    pub maxval: u16,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
