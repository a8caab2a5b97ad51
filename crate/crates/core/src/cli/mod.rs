//! The `medfact` command line.
//!
//! Exit codes: 0 success, 1 record-level failures (or encoding findings for
//! `triggers validate`), 2 unusable input or configuration.

mod commands;
mod overlay;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::engine::{Mode, Precedence, DEFAULT_SCOPE_WINDOW};
use crate::projection::{Unmapped, DEFAULT_IN_FLIGHT};
use crate::triggers::{BundledSet, BUNDLED_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RECORD_ERRORS: i32 = 1;
pub const EXIT_UNUSABLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "medfact",
    about = "Clinical factuality detection, annotation projection and evaluation"
)]
pub struct Cli {
    /// TOML file with defaults; top-level keys apply globally, tables such as
    /// [detect] or [triggers.validate] apply to one subcommand. Flags and
    /// environment variables take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the entity of every corpus record.
    Detect(DetectArgs),
    /// Translate a corpus with entity markup and drop defective output.
    Project(ProjectArgs),
    /// Import an external corpus format into corpus JSONL.
    Convert(ConvertArgs),
    /// Score prediction files against gold labels.
    Evaluate(EvaluateArgs),
    /// Trigger-set maintenance.
    #[command(subcommand)]
    Triggers(TriggersCommand),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Corpus JSONL.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Trigger TSV; defaults to the bundled set for --lang and --mode.
    #[arg(long)]
    pub triggers: Option<PathBuf>,
    #[arg(long)]
    pub lang: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Fixed)]
    pub mode: ModeArg,
    /// Tokens a trigger governs.
    #[arg(long, default_value_t = DEFAULT_SCOPE_WINDOW)]
    pub scope_window: usize,
    /// Rule when negation and possible cues both cover the entity.
    #[arg(long, value_enum, default_value_t = PrecedenceArg::Nearest)]
    pub precedence: PrecedenceArg,
    /// Detections JSONL; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendArg::Stub)]
    pub backend: BackendArg,
    /// MT server URL for the http backend.
    #[arg(long, env = "MEDFACT_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Per-call timeout for the http backend.
    #[arg(long, env = "MEDFACT_TIMEOUT_MS", default_value_t = 30_000)]
    pub timeout_ms: u64,
    /// Stub lexicon JSONL of {"source","target"} lines; the built-in
    /// three-sentence lexicon if omitted.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// What the stub does with sentences missing from its lexicon.
    #[arg(long, value_enum, default_value_t = UnmappedArg::Error)]
    pub unmapped: UnmappedArg,
    #[arg(long)]
    pub target_lang: String,
    /// Discard report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Retained corpus JSONL; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Concurrent backend calls.
    #[arg(long, default_value_t = DEFAULT_IN_FLIGHT)]
    pub in_flight: usize,
    #[arg(long, default_value_t = 2.5)]
    pub max_length_ratio: f64,
    #[arg(long, default_value_t = 3)]
    pub repeat_ngram: usize,
    #[arg(long, default_value_t = 3)]
    pub repeat_count: usize,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub format: FormatArg,
    /// Input file; for i2b2 the assertion file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// i2b2 only: the document text the assertion offsets refer to.
    #[arg(long)]
    pub text: Option<PathBuf>,
    /// i2b2 only: id prefix for emitted records; the text file stem if
    /// omitted.
    #[arg(long)]
    pub doc_id: Option<String>,
    /// Corpus JSONL; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest gap in code points between merged entity fragments.
    #[arg(long, default_value_t = crate::adapters::DEFAULT_MAX_GAP)]
    pub max_gap: usize,
    /// Entity type to keep for tabular formats ("any" keeps all); defaults
    /// to medical-condition for ex4cds and diagnosis for bronco.
    #[arg(long)]
    pub entity_type: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Gold corpus JSONL.
    #[arg(long)]
    pub gold: PathBuf,
    /// Prediction JSONL as NAME=PATH or PATH (named after the file stem);
    /// repeat for a comparison.
    #[arg(long, required = true)]
    pub pred: Vec<String>,
    /// Dataset name in the report; the gold file stem if omitted.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Subcommand)]
pub enum TriggersCommand {
    /// Report encoding mismatches, category conflicts and dead triggers.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub triggers: PathBuf,
    #[arg(long)]
    pub lang: String,
    /// Selects the normalization policy the file is checked against.
    #[arg(long, value_enum, default_value_t = ModeArg::Fixed)]
    pub mode: ModeArg,
    /// Sample corpus JSONL for dead-trigger detection.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Baseline,
    Fixed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Baseline => Mode::Baseline,
            ModeArg::Fixed => Mode::Fixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecedenceArg {
    Nearest,
    Possible,
}

impl From<PrecedenceArg> for Precedence {
    fn from(p: PrecedenceArg) -> Self {
        match p {
            PrecedenceArg::Nearest => Precedence::NearestTrigger,
            PrecedenceArg::Possible => Precedence::PossibleOverNegated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Stub,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnmappedArg {
    Echo,
    Empty,
    Error,
}

impl From<UnmappedArg> for Unmapped {
    fn from(u: UnmappedArg) -> Self {
        match u {
            UnmappedArg::Echo => Unmapped::Echo,
            UnmappedArg::Empty => Unmapped::Empty,
            UnmappedArg::Error => Unmapped::Error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    I2b2,
    Ex4cds,
    Bronco,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Toolkit version plus the bundled trigger-set versions.
pub fn version_string() -> String {
    let sets: Vec<String> = [BundledSet::En, BundledSet::DeBaseline, BundledSet::DeFixed]
        .iter()
        .map(|s| format!("{} v{BUNDLED_VERSION}", s.name()))
        .collect();
    format!(
        "{} (trigger sets: {})",
        env!("CARGO_PKG_VERSION"),
        sets.join(", ")
    )
}

pub fn command() -> clap::Command {
    Cli::command().version(version_string())
}

/// A failure that ends the run with the given exit code.
#[derive(Debug)]
pub(crate) struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub(crate) fn unusable(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_UNUSABLE,
            message: message.into(),
        }
    }
}

/// Runs the CLI on `args` (including the program name), writing data to
/// `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let matches = match overlay::parse_with_config(command(), args) {
        Ok(m) => m,
        Err(overlay::ParseFailure::Clap(e)) => {
            let code = if e.use_stderr() {
                EXIT_UNUSABLE
            } else {
                EXIT_OK
            };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
        Err(overlay::ParseFailure::Config(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_UNUSABLE;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return EXIT_UNUSABLE;
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker pool: {e}");
            return EXIT_UNUSABLE;
        }
    };
    let result = commands::dispatch(&cli, &pool, stdout, stderr);
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
