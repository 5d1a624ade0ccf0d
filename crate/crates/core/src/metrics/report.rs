use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{cider, gleu, meteor, rouge_l, tokenize, CiderItem, GLEU_MAX_N};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no results to evaluate")]
    Empty,
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub commit_id: String,
    pub generated: String,
    #[serde(default)]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScores {
    pub commit_id: String,
    pub bleu: f64,
    pub rouge_l_f: f64,
    pub meteor: f64,
    pub cider: f64,
}

/// Means of the per-item scores, ×100, rounded to two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub bleu: f64,
    pub rouge_l: f64,
    pub meteor: f64,
    pub cider: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_item: Vec<ItemScores>,
    pub aggregates: Aggregates,
    pub evaluated: usize,
    pub skipped: usize,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

const NOTES: &[&str] = &[
    "tokens: lowercased, whitespace-split, edge punctuation stripped",
    "bleu: sentence-level google_bleu over pooled 1-4-grams, min(precision, recall)",
    "rouge_l: LCS F-measure with beta = 1",
    "meteor: exact then Porter2-stem unigram matching; no synonym stage, so scores can be lower than full METEOR",
    "cider: CIDEr (not CIDEr-D), n = 1..4, IDF over this run's references, x10",
    "aggregates: arithmetic mean of sentence-level scores x100, two decimals",
];

/// Parses results JSONL, ignoring blank lines.
pub fn read_results(reader: impl BufRead) -> Result<Vec<RunResult>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| EvalError::Parse { line: i + 1, source })?);
    }
    Ok(out)
}

fn percent(values: impl Iterator<Item = f64>, count: usize) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let mean = values.sum::<f64>() / count as f64;
    (mean * 100.0 * 100.0).round() / 100.0
}

/// Scores every result that has a reference; the rest are counted as skipped.
pub fn evaluate_run(results: &[RunResult]) -> Result<MetricReport, EvalError> {
    if results.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut warnings = Vec::new();
    let scored: Vec<(&RunResult, &str)> =
        results.iter().filter_map(|r| r.reference.as_deref().map(|reference| (r, reference))).collect();
    let skipped = results.len() - scored.len();
    if skipped > 0 {
        warnings.push(format!("{skipped} item(s) without a reference were skipped"));
    }

    let tokenized: Vec<_> = scored.iter().map(|(r, reference)| (tokenize(&r.generated), tokenize(reference))).collect();
    let cider_scores = if tokenized.is_empty() {
        None
    } else {
        let items: Vec<CiderItem> =
            tokenized.iter().map(|(c, r)| CiderItem { candidate: c.clone(), references: vec![r.clone()] }).collect();
        let scores = cider(&items).expect("non-empty items with one reference each");
        if scores.degenerate_idf {
            warnings.push("cider: a single-item run makes every IDF zero; cider reported as 0".to_string());
        }
        Some(scores)
    };

    let per_item: Vec<ItemScores> = scored
        .iter()
        .zip(&tokenized)
        .enumerate()
        .map(|(i, ((r, _), (cand, reference)))| ItemScores {
            commit_id: r.commit_id.clone(),
            bleu: gleu(cand, reference, GLEU_MAX_N),
            rouge_l_f: rouge_l(cand, reference).f,
            meteor: meteor(cand, reference),
            cider: cider_scores.as_ref().map_or(0.0, |s| s.per_item[i]),
        })
        .collect();

    let n = per_item.len();
    let aggregates = Aggregates {
        bleu: percent(per_item.iter().map(|s| s.bleu), n),
        rouge_l: percent(per_item.iter().map(|s| s.rouge_l_f), n),
        meteor: percent(per_item.iter().map(|s| s.meteor), n),
        cider: percent(per_item.iter().map(|s| s.cider), n),
    };
    Ok(MetricReport {
        per_item,
        aggregates,
        evaluated: n,
        skipped,
        warnings,
        notes: NOTES.iter().map(|s| s.to_string()).collect(),
    })
}
