//! Text-similarity metrics for generated commit messages, run reports, and
//! the human-evaluation session format.

mod cider;
mod human;
mod meteor;
mod ngram;
mod report;
mod rouge;

pub use cider::{cider, CiderError, CiderItem, CiderScores, CIDER_MAX_N};
pub use human::{CandidateEntry, HumanEvalError, HumanEvalItem, RaterScore};
pub use meteor::{meteor, Alignment};
pub use ngram::{gleu, ngram_counts, GLEU_MAX_N};
pub use report::{evaluate_run, read_results, Aggregates, EvalError, ItemScores, MetricReport, RunResult};
pub use rouge::{lcs_len, rouge_l, RougeScore};

/// Lowercase word tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenizedText {
    pub tokens: Vec<String>,
}

impl TokenizedText {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl From<&str> for TokenizedText {
    fn from(text: &str) -> Self {
        tokenize(text)
    }
}

fn is_edge_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || (!c.is_ascii() && !c.is_alphanumeric())
}

/// Lowercases, splits on whitespace and strips punctuation from both ends
/// of each token; interior punctuation (`foo.bar`) is kept.
pub fn tokenize(text: &str) -> TokenizedText {
    let tokens = text
        .split_whitespace()
        .map(|w| w.trim_matches(is_edge_punctuation).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();
    TokenizedText { tokens }
}
