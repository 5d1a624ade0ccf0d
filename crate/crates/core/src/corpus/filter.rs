use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{count_changed_lines, normalize_message, CommitRecord};
use crate::lang::LanguageSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterCriterion {
    MessageLength,
    DiffSize,
    FileType,
    BotAuthor,
    RevertOrMerge,
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub sha: String,
    pub accepted: bool,
    pub failed_criteria: Vec<FilterCriterion>,
}

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub min_words: usize,
    pub max_words: usize,
    pub max_changed_lines: usize,
    pub languages: LanguageSet,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { min_words: 5, max_words: 50, max_changed_lines: 300, languages: LanguageSet::default() }
    }
}

/// Evaluates every per-record criterion; `failed_criteria` is complete.
pub fn apply_filters(record: &CommitRecord, config: &FilterConfig) -> FilterDecision {
    let mut failed = Vec::new();
    let words = record.message.split_whitespace().count();
    if words < config.min_words || words > config.max_words {
        failed.push(FilterCriterion::MessageLength);
    }
    if count_changed_lines(&record.diff) > config.max_changed_lines {
        failed.push(FilterCriterion::DiffSize);
    }
    if !record.changed_files.iter().any(|f| config.languages.detect(f).is_some()) {
        failed.push(FilterCriterion::FileType);
    }
    if record.author.contains("[bot]") {
        failed.push(FilterCriterion::BotAuthor);
    }
    let message = record.message.to_lowercase();
    if message.contains("merge") || message.contains("revert") {
        failed.push(FilterCriterion::RevertOrMerge);
    }
    FilterDecision { sha: record.sha.clone(), accepted: failed.is_empty(), failed_criteria: failed }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterOutcome {
    pub decisions: Vec<FilterDecision>,
    pub accepted: Vec<CommitRecord>,
}

/// All six criteria over a corpus. A record is a duplicate when an earlier
/// record in the input, accepted or not, has the same normalized message
/// and diff.
pub fn filter_corpus(records: Vec<CommitRecord>, config: &FilterConfig) -> FilterOutcome {
    let mut seen = HashSet::new();
    let mut decisions = Vec::with_capacity(records.len());
    let mut accepted = Vec::new();
    for record in records {
        let mut decision = apply_filters(&record, config);
        if !seen.insert((normalize_message(&record.message), record.diff.clone())) {
            decision.failed_criteria.push(FilterCriterion::Duplicate);
            decision.accepted = false;
        }
        if decision.accepted {
            accepted.push(record);
        }
        decisions.push(decision);
    }
    FilterOutcome { decisions, accepted }
}
