//! `c3gen`: index repositories, retrieve commit context, generate and score
//! commit messages, and build commit corpora.
//!
//! Exit codes: 0 success, 2 input error, 3 backend error.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use c3gen_core::generation::GenerationError;

#[derive(Debug, Parser)]
#[command(name = "c3gen", version, about = "Commit-context retrieval and commit-message generation")]
pub struct Cli {
    /// TOML settings file; flags and environment variables override it.
    #[arg(long, global = true, env = "C3GEN_CONFIG")]
    pub config: Option<PathBuf>,

    /// Worker threads for parsing and scanning.
    #[arg(long, global = true, env = "C3GEN_JOBS")]
    pub jobs: Option<usize>,

    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    /// More logging on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only errors on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and persist the definition index and structure graphs.
    Index(IndexArgs),
    /// Print the relevant code context for a diff.
    Retrieve(RetrieveArgs),
    /// Generate a commit message for a diff.
    Generate(GenerateArgs),
    /// Score generated messages against references.
    Evaluate(EvaluateArgs),
    /// Build, filter, deduplicate and split commit corpora.
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Debug, Clone, Args)]
pub struct FileArgs {
    /// Comma-separated languages to index (python, java, javascript, cpp).
    #[arg(long, env = "C3GEN_LANGUAGES")]
    pub languages: Option<String>,
    /// Glob of repository paths to skip (repeatable).
    #[arg(long = "exclude", value_name = "GLOB")]
    pub exclude: Vec<String>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Repository root.
    #[arg(long, default_value = ".")]
    pub repo: PathBuf,
    /// Index directory; defaults to `<repo>/.c3gen/index`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub files: FileArgs,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RetrievalArgs {
    /// Repository root, in its post-change state.
    #[arg(long, default_value = ".")]
    pub repo: PathBuf,
    /// Unified diff file, or `-` for stdin.
    #[arg(long)]
    pub diff: PathBuf,
    #[command(flatten)]
    pub files: FileArgs,
    #[arg(long, env = "C3GEN_MAX_SNIPPETS")]
    pub max_snippets: Option<usize>,
    #[arg(long, env = "C3GEN_MAX_TOTAL_LINES")]
    pub max_total_lines: Option<usize>,
    /// Keep references inside the referenced entity's own body.
    #[arg(long)]
    pub include_self_refs: bool,
    /// Drop snippets that are exactly a modified entity's definition.
    #[arg(long)]
    pub exclude_modified_bodies: bool,
    /// innermost or all-enclosing.
    #[arg(long, env = "C3GEN_ATTRIBUTION")]
    pub attribution: Option<String>,
    /// Use a cached index even if the repository changed since.
    #[arg(long)]
    pub no_reindex: bool,
    /// Index directory; defaults to `<repo>/.c3gen/index`.
    #[arg(long)]
    pub index_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[command(flatten)]
    pub retrieval: RetrievalArgs,
    /// Write the context here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write entities, invocation records and warnings as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Naive,
    C3gen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Http,
    Mock,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub retrieval: RetrievalArgs,
    #[arg(long, value_enum, default_value = "c3gen")]
    pub mode: ModeArg,
    #[arg(long, value_enum, env = "C3GEN_BACKEND", default_value = "http")]
    pub backend: BackendKind,
    /// Mock backend: reply with this text instead of echoing the diff.
    #[arg(long)]
    pub mock_reply: Option<String>,
    /// Chat-completion URL. The bearer token is read from C3GEN_API_KEY.
    #[arg(long, env = "C3GEN_ENDPOINT")]
    pub endpoint: Option<String>,
    #[arg(long, env = "C3GEN_MODEL")]
    pub model: Option<String>,
    #[arg(long, env = "C3GEN_TEMPERATURE")]
    pub temperature: Option<f64>,
    /// Request timeout in seconds.
    #[arg(long, env = "C3GEN_TIMEOUT")]
    pub timeout: Option<f64>,
    #[arg(long, env = "C3GEN_MAX_RETRIES")]
    pub max_retries: Option<u32>,
    /// First retry delay in milliseconds; doubles per retry.
    #[arg(long, env = "C3GEN_BACKOFF_MS")]
    pub backoff_ms: Option<u64>,
    #[arg(long)]
    pub template: Option<String>,
    /// Refuse prompts longer than this many characters.
    #[arg(long, env = "C3GEN_MAX_PROMPT_CHARS")]
    pub max_prompt_chars: Option<usize>,
    /// Also write the rendered prompt bundle as JSON.
    #[arg(long)]
    pub prompt_out: Option<PathBuf>,
    /// Write the message here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Results JSONL: {"commit_id", "generated", "reference"} per line; `-` for stdin.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Read commits from local git checkouts.
    Build(CorpusBuildArgs),
    /// Apply the quality filters.
    Filter(CorpusFilterArgs),
    /// Drop repeated (message, diff) pairs.
    Dedup(CorpusIoArgs),
    /// Seeded train/test split.
    Split(CorpusSplitArgs),
}

#[derive(Debug, Args)]
pub struct CorpusBuildArgs {
    /// Repository checkout (repeatable).
    #[arg(long = "repo", required = true)]
    pub repos: Vec<PathBuf>,
    /// Earliest commit date: RFC 3339 or YYYY-MM-DD.
    #[arg(long)]
    pub since: Option<String>,
    #[arg(long)]
    pub branch: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusIoArgs {
    /// Corpus JSONL, or `-` for stdin.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusFilterArgs {
    #[command(flatten)]
    pub io: CorpusIoArgs,
    /// Per-record decisions as JSONL.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub min_words: Option<usize>,
    #[arg(long)]
    pub max_words: Option<usize>,
    #[arg(long)]
    pub max_changed_lines: Option<usize>,
    /// Comma-separated languages whose files count as code.
    #[arg(long)]
    pub languages: Option<String>,
}

#[derive(Debug, Args)]
pub struct CorpusSplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub test_size: usize,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
}

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BACKEND: u8 = 3;

fn exit_code_for(err: &anyhow::Error) -> u8 {
    let backend = err
        .chain()
        .any(|e| e.downcast_ref::<GenerationError>().is_some() || e.downcast_ref::<commands::BackendSetup>().is_some());
    if backend {
        EXIT_BACKEND
    } else {
        EXIT_INPUT
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut run = manifest::RunManifest::start(commands::name(&cli.command));
    let result = commands::run(&cli, &mut run);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(e)
        }
    };
    if let Err(e) = run.emit(i32::from(code), cli.manifest.as_deref()) {
        eprintln!("error: {e:#}");
    }
    ExitCode::from(code)
}
