//! `lfembed`: embed, verify, generate, amalgamate and profile metric spaces.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_CODES: &str = "\
Exit codes:
  0  success, every checked bound holds
  1  could not write an output file
  2  input error (unreadable file, bad flag, unknown point, ...)
  3  input is not a metric (the violating triple is printed)
  4  a bound or certificate check failed (the failing pair is printed)";

#[derive(Parser, Debug)]
#[command(name = "lfembed", version, about = "Bi-Lipschitz embeddings of finite metric spaces", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Embed a space and report its distortion.
    Embed(EmbedArgs),
    /// Certify every pair of an embedding against the case inequalities.
    Verify(VerifyArgs),
    /// Write a generated space to disk.
    Generate(GenerateArgs),
    /// Glue spaces at their basepoints.
    Amalgamate(AmalgamateArgs),
    /// Largest ball cardinality at a list of radii.
    Profile(ProfileArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Auto,
    /// Distance matrix with a header row of point names.
    Csv,
    /// `{"nodes", "edges", "basepoint"}` weighted graph.
    Graph,
    /// `{"points", "basepoint", "dist"}` space document.
    Space,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ArithChoice {
    /// Rational up to 64 points, float beyond.
    Auto,
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OperatorChoice {
    Identity,
    Half,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyChoice {
    Grid,
    RandomGraph,
    RandomTree,
    UniformPoints,
}

/// Where the space comes from: a file or a generator.
#[derive(Args, Debug, Clone)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceArgs {
    /// Distance matrix CSV, graph JSON or space JSON.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Generate the space instead of reading it.
    #[arg(long, value_enum)]
    pub family: Option<FamilyChoice>,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: Format,
    /// Name of the basepoint; defaults to the one stored in the file, or the first point.
    #[arg(long)]
    pub basepoint: Option<String>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GeneratorArgs {
    /// Lattice or point-cloud dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Grid radius.
    #[arg(long, default_value_t = 2)]
    pub radius: usize,
    /// Number of points for random families.
    #[arg(long = "points", short = 'n', default_value_t = 32)]
    pub points: usize,
    /// Edge probability for random graphs.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Seed for random families.
    #[arg(long, default_value_t = 0)]
    pub gen_seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ConstructionArgs {
    #[arg(long, value_enum, default_value = "identity")]
    pub operators: OperatorChoice,
    /// Seed for `--operators random`; required there and rejected elsewhere.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub arith: ArithChoice,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub construction: ConstructionArgs,
    /// Where to write the serialized embedding.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Where to write the distortion and envelope report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(id = "verify_source", required = true, multiple = false)]
pub struct VerifySource {
    /// Embedding written by `embed`.
    #[arg(long)]
    pub embedding: Option<PathBuf>,
    /// Distance matrix CSV, graph JSON or space JSON.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Generate the space instead of reading it.
    #[arg(long, value_enum)]
    pub family: Option<FamilyChoice>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: VerifySource,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: Format,
    #[arg(long)]
    pub basepoint: Option<String>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub construction: ConstructionArgs,
    /// Full JSON report: distortion, case summary, envelope, moduli.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV with one row per pair.
    #[arg(long)]
    pub full_ledger: Option<PathBuf>,
    /// CSV with one row per checked inequality.
    #[arg(long)]
    pub checks: Option<PathBuf>,
    /// Comma-separated moduli thresholds, in the rescaled units of the embedding.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<String>,
    /// Number of default thresholds when `--thresholds` is absent.
    #[arg(long, default_value_t = 20)]
    pub threshold_count: usize,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyChoice,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// `.csv` writes a distance matrix, anything else a space document.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write the edge list of graph families as graph JSON.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AmalgamateArgs {
    /// Part files, glued in the order given.
    #[arg(required = true)]
    pub parts: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: Format,
    /// `.csv` writes a distance matrix, anything else a space document.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Isometry certificate; printed to stdout when absent.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated radii; defaults to powers of two up to the diameter.
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<String>,
    /// CSV output; printed to stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Embed(a) => commands::embed(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Generate(a) => commands::generate(&a),
        Command::Amalgamate(a) => commands::amalgamate(&a),
        Command::Profile(a) => commands::profile(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
