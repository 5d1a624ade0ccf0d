//! Commit datasets: reading local git history, quality filters,
//! deduplication and seeded train/test splits.

mod filter;
mod git;

use std::collections::HashSet;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::{changed_line_count, parse_unified_diff};

pub use filter::{apply_filters, filter_corpus, FilterConfig, FilterCriterion, FilterDecision, FilterOutcome};
pub use git::{read_git_history, GitHistory, HistoryOptions};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("`{0}` is not a git repository")]
    NotARepository(String),
    #[error("branch `{0}` not found")]
    MissingBranch(String),
    #[error("`git {command}` failed: {stderr}")]
    Git { command: String, stderr: String },
    #[error("cannot run git: {0}")]
    GitUnavailable(#[source] std::io::Error),
    #[error("unexpected git output for {sha}: {detail}")]
    GitOutput { sha: String, detail: String },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("test size {test_size} exceeds the {available} available records")]
    TestSizeTooLarge { test_size: usize, available: usize },
}

/// One commit, as stored in corpus JSONL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub git_url: String,
    pub repo_full_name: String,
    pub sha: String,
    pub author: String,
    pub message: String,
    pub diff: String,
    pub changed_files: Vec<String>,
    /// ISO-8601, UTC.
    pub timestamp: String,
    pub loc_changed: usize,
}

impl CommitRecord {
    /// Problems with the record's own invariants, if any.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !is_sha(&self.sha) {
            problems.push(format!("sha `{}` is not 40 lowercase hex characters", self.sha));
        }
        let recount = count_changed_lines(&self.diff);
        if recount != self.loc_changed {
            problems.push(format!("loc_changed is {} but the diff changes {recount} lines", self.loc_changed));
        }
        problems
    }
}

pub fn is_sha(s: &str) -> bool {
    s.len() == 40 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

/// Added plus removed lines. Falls back to counting `+`/`-` lines outside
/// file headers when the text is not a well-formed unified diff.
pub fn count_changed_lines(diff: &str) -> usize {
    match parse_unified_diff(diff) {
        Ok(segments) => changed_line_count(&segments),
        Err(_) => diff
            .lines()
            .filter(|l| (l.starts_with('+') && !l.starts_with("+++")) || (l.starts_with('-') && !l.starts_with("---")))
            .count(),
    }
}

/// Lowercased message with whitespace runs collapsed to single spaces.
pub fn normalize_message(message: &str) -> String {
    message.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

/// Keeps the first record of every `(normalized message, diff)` pair,
/// preserving order.
pub fn deduplicate(records: Vec<CommitRecord>) -> Vec<CommitRecord> {
    let mut seen = HashSet::new();
    records.into_iter().filter(|r| seen.insert((normalize_message(&r.message), r.diff.clone()))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded random partition; both halves keep the input order.
pub fn split<T>(records: Vec<T>, seed: u64, test_size: usize) -> Result<Split<T>, CorpusError> {
    if test_size > records.len() {
        return Err(CorpusError::TestSizeTooLarge { test_size, available: records.len() });
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut in_test = vec![false; records.len()];
    for &i in &order[..test_size] {
        in_test[i] = true;
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (record, test_member) in records.into_iter().zip(in_test) {
        if test_member {
            test.push(record);
        } else {
            train.push(record);
        }
    }
    Ok(Split { train, test })
}

/// Reads JSONL, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| CorpusError::Parse { line: i + 1, source })?);
    }
    Ok(out)
}
