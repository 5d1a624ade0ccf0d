use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;

use c3gen_core::canonical;
use c3gen_core::context::ContextCaps;
use c3gen_core::corpus::{self, CommitRecord, FilterConfig, HistoryOptions};
use c3gen_core::csg::{build_csgs, build_definition_index, tree_digest, IndexOptions};
use c3gen_core::generation::{
    build_prompt, generate_message, Backend, BackendConfig, HttpBackend, MockBackend, MockBehavior,
    DEFAULT_MAX_PROMPT_CHARS, TEMPLATE_ID,
};
use c3gen_core::metrics::{evaluate_run, read_results};
use c3gen_core::pipeline::{retrieve, RetrievalOptions, INDEX_DIR};
use c3gen_core::LanguageSet;

use crate::config::ConfigFile;
use crate::manifest::{sha256_hex, RunManifest};
use crate::{
    BackendKind, Cli, Command, CorpusBuildArgs, CorpusCommand, CorpusFilterArgs, CorpusIoArgs, CorpusSplitArgs,
    EvaluateArgs, FileArgs, GenerateArgs, IndexArgs, ModeArg, RetrievalArgs, RetrieveArgs,
};

/// The backend could not be set up (as opposed to bad input).
#[derive(Debug)]
pub struct BackendSetup(pub String);

impl std::fmt::Display for BackendSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BackendSetup {}

pub fn name(command: &Command) -> &'static str {
    match command {
        Command::Index(_) => "index",
        Command::Retrieve(_) => "retrieve",
        Command::Generate(_) => "generate",
        Command::Evaluate(_) => "evaluate",
        Command::Corpus(CorpusCommand::Build(_)) => "corpus build",
        Command::Corpus(CorpusCommand::Filter(_)) => "corpus filter",
        Command::Corpus(CorpusCommand::Dedup(_)) => "corpus dedup",
        Command::Corpus(CorpusCommand::Split(_)) => "corpus split",
    }
}

pub fn run(cli: &Cli, manifest: &mut RunManifest) -> Result<()> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    if let Some(jobs) = cli.jobs.or(cfg.jobs) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Index(a) => index(a, &cfg, manifest),
        Command::Retrieve(a) => retrieve_cmd(a, &cfg, manifest),
        Command::Generate(a) => generate(a, &cfg, manifest),
        Command::Evaluate(a) => evaluate(a, manifest),
        Command::Corpus(CorpusCommand::Build(a)) => corpus_build(a, manifest),
        Command::Corpus(CorpusCommand::Filter(a)) => corpus_filter(a, &cfg, manifest),
        Command::Corpus(CorpusCommand::Dedup(a)) => corpus_dedup(a, manifest),
        Command::Corpus(CorpusCommand::Split(a)) => corpus_split(a, manifest),
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading stdin")?;
        Ok(buf)
    } else {
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn languages(flag: Option<&str>, config: Option<&Vec<String>>) -> Result<LanguageSet> {
    match flag.map(str::to_string).or_else(|| config.map(|v| v.join(","))) {
        Some(list) => Ok(LanguageSet::parse_list(&list)?),
        None => Ok(LanguageSet::default()),
    }
}

fn index_options(args: &FileArgs, cfg: &ConfigFile) -> Result<IndexOptions> {
    let exclude =
        if args.exclude.is_empty() { cfg.retrieval.exclude.clone().unwrap_or_default() } else { args.exclude.clone() };
    Ok(IndexOptions { languages: languages(args.languages.as_deref(), cfg.retrieval.languages.as_ref())?, exclude })
}

fn options_json(options: &IndexOptions) -> serde_json::Value {
    json!({
        "languages": options.languages.languages().iter().map(|l| l.tag()).collect::<Vec<_>>(),
        "exclude": options.exclude,
    })
}

fn require_repo(repo: &Path) -> Result<()> {
    if !repo.is_dir() {
        bail!("repository `{}` does not exist or is not a directory", repo.display());
    }
    Ok(())
}

fn index(args: &IndexArgs, cfg: &ConfigFile, manifest: &mut RunManifest) -> Result<()> {
    require_repo(&args.repo)?;
    let options = index_options(&args.files, cfg)?;
    let out_dir = args.out_dir.clone().unwrap_or_else(|| args.repo.join(INDEX_DIR));
    manifest.config = json!({ "files": options_json(&options), "out_dir": out_dir });

    let build = build_definition_index(&args.repo, &options)?;
    build.index.write_to(&out_dir)?;
    let graphs = canonical::to_document(&build_csgs(&build.index))?;
    std::fs::write(out_dir.join("graphs.json"), graphs).context("writing graphs.json")?;
    let digest = build.index.tree_digest();
    manifest.input("repo_tree", digest.clone());

    let summary = json!({
        "files": build.index.len(),
        "definitions": build.index.definition_count(),
        "tree_digest": digest,
        "index_dir": out_dir,
        "warnings": build.warnings,
    });
    emit(args.out.as_deref(), &canonical::to_document(&summary)?)
}

fn retrieval_options(args: &RetrievalArgs, cfg: &ConfigFile) -> Result<RetrievalOptions> {
    let r = &cfg.retrieval;
    let defaults = ContextCaps::default();
    let attribution = match args.attribution.as_deref().or(r.attribution.as_deref()) {
        Some(a) => a.parse().map_err(|e: String| anyhow!(e))?,
        None => Default::default(),
    };
    Ok(RetrievalOptions {
        files: index_options(&args.files, cfg)?,
        attribution,
        include_self_refs: args.include_self_refs || r.include_self_refs.unwrap_or(false),
        exclude_modified_bodies: args.exclude_modified_bodies || r.exclude_modified_bodies.unwrap_or(false),
        caps: ContextCaps {
            max_snippets: args.max_snippets.or(r.max_snippets).unwrap_or(defaults.max_snippets),
            max_total_lines: args.max_total_lines.or(r.max_total_lines).unwrap_or(defaults.max_total_lines),
        },
        index_dir: args.index_dir.clone(),
        no_reindex: args.no_reindex,
        persist_index: true,
    })
}

fn retrieval_json(options: &RetrievalOptions) -> serde_json::Value {
    json!({
        "files": options_json(&options.files),
        "attribution": options.attribution,
        "include_self_refs": options.include_self_refs,
        "exclude_modified_bodies": options.exclude_modified_bodies,
        "max_snippets": options.caps.max_snippets,
        "max_total_lines": options.caps.max_total_lines,
        "no_reindex": options.no_reindex,
    })
}

fn read_diff(args: &RetrievalArgs, manifest: &mut RunManifest) -> Result<String> {
    let bytes = read_input(&args.diff)?;
    manifest.input("diff", sha256_hex(&bytes));
    String::from_utf8(bytes).map_err(|_| anyhow!("diff `{}` is not valid UTF-8", args.diff.display()))
}

fn retrieve_cmd(args: &RetrieveArgs, cfg: &ConfigFile, manifest: &mut RunManifest) -> Result<()> {
    let r = &args.retrieval;
    require_repo(&r.repo)?;
    let options = retrieval_options(r, cfg)?;
    manifest.config = json!({ "retrieval": retrieval_json(&options) });
    let diff = read_diff(r, manifest)?;
    manifest.input("repo_tree", tree_digest(&r.repo, &options.files)?);

    let retrieval = retrieve(&r.repo, &diff, &options)?;
    if let Some(trace) = &args.trace {
        std::fs::write(trace, canonical::to_document(&retrieval)?)
            .with_context(|| format!("writing {}", trace.display()))?;
    }
    emit(args.out.as_deref(), &canonical::to_document(&retrieval.context)?)
}

fn backend_config(args: &GenerateArgs, cfg: &ConfigFile) -> BackendConfig {
    let b = &cfg.backend;
    let d = BackendConfig::default();
    BackendConfig {
        endpoint: args.endpoint.clone().or_else(|| b.endpoint.clone()).unwrap_or(d.endpoint),
        model: args.model.clone().or_else(|| b.model.clone()).unwrap_or(d.model),
        temperature: args.temperature.or(b.temperature).unwrap_or(d.temperature),
        timeout: args.timeout.or(b.timeout_secs).map(Duration::from_secs_f64).unwrap_or(d.timeout),
        max_retries: args.max_retries.or(b.max_retries).unwrap_or(d.max_retries),
        backoff: args.backoff_ms.or(b.backoff_ms).map(Duration::from_millis).unwrap_or(d.backoff),
    }
}

fn generate(args: &GenerateArgs, cfg: &ConfigFile, manifest: &mut RunManifest) -> Result<()> {
    let r = &args.retrieval;
    require_repo(&r.repo)?;
    let options = retrieval_options(r, cfg)?;
    let config = backend_config(args, cfg);
    config.validate().map_err(|e| anyhow!("invalid backend settings: {e}"))?;
    let template = args.template.clone().or_else(|| cfg.generation.template.clone()).unwrap_or(TEMPLATE_ID.to_string());
    let max_chars = args.max_prompt_chars.or(cfg.generation.max_prompt_chars).unwrap_or(DEFAULT_MAX_PROMPT_CHARS);
    manifest.config = json!({
        "mode": match args.mode { ModeArg::Naive => "naive", ModeArg::C3gen => "c3gen" },
        "backend": match args.backend { BackendKind::Http => "http", BackendKind::Mock => "mock" },
        "backend_config": config,
        "mock_reply": args.mock_reply,
        "template": template,
        "max_prompt_chars": max_chars,
        "retrieval": retrieval_json(&options),
    });
    let diff = read_diff(r, manifest)?;
    manifest.input("repo_tree", tree_digest(&r.repo, &options.files)?);

    let context = match args.mode {
        ModeArg::Naive => None,
        ModeArg::C3gen => Some(retrieve(&r.repo, &diff, &options)?.context),
    };
    let bundle = build_prompt(&diff, context.as_ref(), &template, max_chars)?;
    manifest.input("prompt", sha256_hex(format!("{}\0{}", bundle.system_text, bundle.user_text).as_bytes()));
    if bundle.context_empty {
        log::warn!("context_empty: no related code found; using the diff-only prompt");
    }
    if let Some(p) = &args.prompt_out {
        std::fs::write(p, canonical::to_document(&bundle)?).with_context(|| format!("writing {}", p.display()))?;
    }

    let backend: Box<dyn Backend> = match args.backend {
        BackendKind::Mock => Box::new(MockBackend::new(match &args.mock_reply {
            Some(text) => MockBehavior::Fixed(text.clone()),
            None => MockBehavior::EchoFirstAddedLine,
        })),
        BackendKind::Http => Box::new(
            HttpBackend::from_env(&config).map_err(|e| BackendSetup(format!("cannot create HTTP client: {e}")))?,
        ),
    };
    let message = generate_message(&bundle, &config, backend.as_ref())?;
    emit(args.out.as_deref(), &canonical::to_document(&message)?)
}

fn evaluate(args: &EvaluateArgs, manifest: &mut RunManifest) -> Result<()> {
    let bytes = read_input(&args.results)?;
    manifest.input("results", sha256_hex(&bytes));
    let results = read_results(bytes.as_slice())?;
    let report = evaluate_run(&results)?;
    emit(args.out.as_deref(), &canonical::to_document(&report)?)
}

fn since(text: &str) -> Result<chrono::DateTime<chrono::Utc>> {
    if let Ok(t) = chrono::DateTime::parse_from_rfc3339(text) {
        return Ok(t.with_timezone(&chrono::Utc));
    }
    let day = chrono::NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map_err(|_| anyhow!("--since `{text}` is neither RFC 3339 nor YYYY-MM-DD"))?;
    Ok(day.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
}

fn read_corpus(path: &Path, manifest: &mut RunManifest) -> Result<Vec<CommitRecord>> {
    let bytes = read_input(path)?;
    manifest.input("corpus", sha256_hex(&bytes));
    let records: Vec<CommitRecord> = corpus::read_jsonl(BufReader::new(bytes.as_slice()))?;
    for r in &records {
        for problem in r.check() {
            log::warn!("{}: {problem}", r.sha);
        }
    }
    Ok(records)
}

fn jsonl<T: serde::Serialize>(items: &[T]) -> Result<String> {
    Ok(canonical::to_jsonl(items)?)
}

fn corpus_build(args: &CorpusBuildArgs, manifest: &mut RunManifest) -> Result<()> {
    let options = HistoryOptions { branch: args.branch.clone(), since: args.since.as_deref().map(since).transpose()? };
    manifest.config =
        json!({ "repos": args.repos, "branch": options.branch, "since": options.since.map(|t| t.to_rfc3339()) });
    let per_repo: Vec<Result<Vec<CommitRecord>>> = args
        .repos
        .par_iter()
        .map(|repo| {
            let history = corpus::read_git_history(repo, &options)?;
            history.collect::<Result<Vec<_>, _>>().map_err(Into::into)
        })
        .collect();
    let mut records = Vec::new();
    for (repo, result) in args.repos.iter().zip(per_repo) {
        let found = result.with_context(|| format!("reading {}", repo.display()))?;
        log::info!("{}: {} commits", repo.display(), found.len());
        records.extend(found);
    }
    emit(args.out.as_deref(), &jsonl(&records)?)
}

fn corpus_filter(args: &CorpusFilterArgs, cfg: &ConfigFile, manifest: &mut RunManifest) -> Result<()> {
    let c = &cfg.corpus;
    let d = FilterConfig::default();
    let config = FilterConfig {
        min_words: args.min_words.or(c.min_words).unwrap_or(d.min_words),
        max_words: args.max_words.or(c.max_words).unwrap_or(d.max_words),
        max_changed_lines: args.max_changed_lines.or(c.max_changed_lines).unwrap_or(d.max_changed_lines),
        languages: languages(args.languages.as_deref(), c.languages.as_ref())?,
    };
    manifest.config = json!({
        "min_words": config.min_words,
        "max_words": config.max_words,
        "max_changed_lines": config.max_changed_lines,
        "languages": config.languages.languages().iter().map(|l| l.tag()).collect::<Vec<_>>(),
    });
    let records = read_corpus(&args.io.input, manifest)?;
    let total = records.len();
    let outcome = corpus::filter_corpus(records, &config);
    log::info!("accepted {} of {total} records", outcome.accepted.len());
    if let Some(report) = &args.report {
        std::fs::write(report, jsonl(&outcome.decisions)?).with_context(|| format!("writing {}", report.display()))?;
    }
    emit(args.io.out.as_deref(), &jsonl(&outcome.accepted)?)
}

fn corpus_dedup(args: &CorpusIoArgs, manifest: &mut RunManifest) -> Result<()> {
    let records = read_corpus(&args.input, manifest)?;
    let total = records.len();
    let kept = corpus::deduplicate(records);
    log::info!("kept {} of {total} records", kept.len());
    emit(args.out.as_deref(), &jsonl(&kept)?)
}

fn corpus_split(args: &CorpusSplitArgs, manifest: &mut RunManifest) -> Result<()> {
    manifest.config = json!({ "seed": args.seed, "test_size": args.test_size });
    let records = read_corpus(&args.input, manifest)?;
    let split = corpus::split(records, args.seed, args.test_size)?;
    let write = |path: &PathBuf, items: &[CommitRecord]| -> Result<()> {
        std::fs::write(path, jsonl(items)?).with_context(|| format!("writing {}", path.display()))
    };
    write(&args.train_out, &split.train)?;
    write(&args.test_out, &split.test)?;
    let summary = json!({
        "train": split.train.len(),
        "test": split.test.len(),
        "test_shas": split.test.iter().map(|r| r.sha.as_str()).collect::<Vec<_>>(),
    });
    emit(None, &canonical::to_document(&summary)?)
}
