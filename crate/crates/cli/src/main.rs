//! `actes`: command-line front end for the register extraction pipeline.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "actes", version, about = "Extract and validate records from recognized parish registers")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a page model on the pages that carry act zones.
    FitPages(FitArgs),
    /// Label pages act / no_act with a fitted model.
    ClassifyPages(ClassifyPagesArgs),
    /// Line-detection quality per page.
    Quality(QualityArgs),
    /// Merge act fragments into acts.
    Assemble(AssembleArgs),
    /// Type acts by keyword matching, or one text given with --text.
    ClassifyActs(ClassifyActsArgs),
    /// Parse written-out dates.
    StandardizeDate(DateArgs),
    /// Split and correct a person name.
    StandardizeName(NameArgs),
    /// Slot, standardize and validate the acts of exports.
    Validate(ValidateArgs),
    /// Score predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Full pipeline over a corpus.
    Run(RunArgs),
    /// Corpus statistics from exports.
    Stats(StatsArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Page model tools.
    #[command(subcommand)]
    Pagekit(Pagekit),
}

#[derive(Subcommand, Debug)]
pub enum Pagekit {
    /// Same as fit-pages.
    Fit(FitArgs),
    /// Score pages with a fitted model.
    Score(ScoreArgs),
    /// Precision / recall / F1 against labelled pages.
    Eval(PageEvalArgs),
    /// Compare feature families, grids and detectors.
    GridSearch(GridSearchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Xml,
    Jsonl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FeatureArg {
    Projection,
    LineDensity,
    LineCount,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DetectorArg {
    IsolationForest,
    Lof,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Register files or directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "line-count")]
    pub features: FeatureArg,
    /// Grid as ROWSxCOLUMNS.
    #[arg(long, default_value = "8x6")]
    pub grid: String,
    #[arg(long, value_enum, default_value = "isolation-forest")]
    pub detector: DetectorArg,
    /// Required for the isolation forest.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 256)]
    pub subsample: usize,
    /// LOF neighbours.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Fit on every page instead of only pages with act zones.
    #[arg(long)]
    pub all_pages: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct ClassifyPagesArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Directory for labelled registers; scores are printed as CSV either way.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Args, Debug)]
pub struct PageEvalArgs {
    /// Registers whose pages carry a `class` of act or no_act.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GridSearchArgs {
    /// Training registers; pages with act zones are used.
    #[arg(long, required = true, num_args = 1..)]
    pub train: Vec<PathBuf>,
    /// Labelled evaluation registers.
    #[arg(long, required = true, num_args = 1..)]
    pub eval: Vec<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Also try LOF with this many neighbours.
    #[arg(long)]
    pub lof_k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct QualityArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

#[derive(Args, Debug)]
pub struct GateArgs {
    /// Keep every fragment regardless of layout.
    #[arg(long)]
    pub no_gate: bool,
    #[arg(long, default_value_t = 2)]
    pub min_lines: usize,
    #[arg(long, default_value_t = 80)]
    pub max_lines: usize,
    #[arg(long, default_value_t = 0.02)]
    pub min_area: f64,
    #[arg(long, default_value_t = 0.98)]
    pub max_area: f64,
}

#[derive(Args, Debug)]
pub struct AssembleArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub gate: GateArgs,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "xml")]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct ClassifyActsArgs {
    /// Register files or directories; acts are assembled first.
    pub inputs: Vec<PathBuf>,
    /// Classify this text and print the scores.
    #[arg(long, conflicts_with = "inputs")]
    pub text: Option<String>,
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    #[arg(long)]
    pub min_score: Option<f64>,
    #[command(flatten)]
    pub gate: GateArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "xml")]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct DateArgs {
    /// Date phrases.
    #[arg(required = true)]
    pub texts: Vec<String>,
    /// Record date (YYYY-MM-DD) resolving relative phrases.
    #[arg(long)]
    pub anchor: Option<String>,
    /// Also list every date found in each text.
    #[arg(long)]
    pub extract: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ActTypeArg {
    Birth,
    Marriage,
    Death,
    Undefined,
}

#[derive(Args, Debug)]
pub struct NameArgs {
    #[arg(required = true)]
    pub names: Vec<String>,
    #[arg(long, value_enum, default_value = "undefined")]
    pub act_type: ActTypeArg,
    /// Slot the name fills, e.g. subject_name or father_name.
    #[arg(long, default_value = "subject_name")]
    pub role: String,
    #[arg(long)]
    pub thesaurus: Option<PathBuf>,
    #[arg(long)]
    pub costs: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub radius: usize,
    /// Replace names by their variant class representative.
    #[arg(long)]
    pub canonicalize: bool,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Export files or directories (from assemble or classify-acts).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Pipeline config for lexicons and thesaurus; built-in data otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "xml")]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Ground-truth registers.
    #[arg(long, required = true, num_args = 1..)]
    pub gt: Vec<PathBuf>,
    /// Predicted registers; pages are matched by id.
    #[arg(long, required = true, num_args = 1..)]
    pub pred: Vec<PathBuf>,
    /// Split label in the CER/WER table.
    #[arg(long, default_value = "all")]
    pub split: String,
    /// Name of the system in the NER table.
    #[arg(long, default_value = "prediction")]
    pub system: String,
    #[arg(long, default_value_t = 0.30)]
    pub ner_threshold: f64,
    /// Write the three CSV tables here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// TOML or JSON pipeline config.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Overrides the config's worker count.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Export files or directories, or a stats.json from `run`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Print CSV instead of the table.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// TOML synthetic corpus settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub registers: Option<usize>,
    #[arg(long)]
    pub acts: Option<usize>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "xml")]
    pub format: FormatArg,
    /// Also write the planted types and statuses as truth.jsonl.
    #[arg(long)]
    pub truth: bool,
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (`actes quality ... | head`) like other filters.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
