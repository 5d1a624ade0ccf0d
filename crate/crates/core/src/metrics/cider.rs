use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::ngram::ngram_counts;
use super::TokenizedText;

pub const CIDER_MAX_N: usize = 4;
const SCALE: f64 = 10.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CiderError {
    #[error("CIDEr needs at least one item")]
    EmptyCorpus,
    #[error("item {0} has no references")]
    NoReferences(usize),
}

#[derive(Debug, Clone)]
pub struct CiderItem {
    pub candidate: TokenizedText,
    pub references: Vec<TokenizedText>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiderScores {
    pub per_item: Vec<f64>,
    pub mean: f64,
    /// Every n-gram has zero IDF (a one-item corpus), so every score is 0.
    pub degenerate_idf: bool,
}

type Vector<'a> = HashMap<&'a [String], f64>;

fn tfidf<'a>(tokens: &'a [String], n: usize, idf: &HashMap<&[String], f64>, log_n: f64) -> Vector<'a> {
    ngram_counts(tokens, n)
        .into_iter()
        .map(|(g, c)| {
            // Unseen in every reference: df is taken as 1.
            let w = idf.get(g).copied().unwrap_or(log_n);
            (g, c as f64 * w)
        })
        .collect()
}

fn cosine(a: &Vector<'_>, b: &Vector<'_>) -> f64 {
    let norm = |v: &Vector<'_>| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().map(|(g, x)| x * b.get(g).copied().unwrap_or(0.0)).sum();
    dot / (na * nb)
}

/// CIDEr (no length penalty) over `n = 1..=4`, scaled to `[0, 10]`.
///
/// IDF is `ln(N / df)` where `df` counts the items whose references contain
/// the n-gram. Term frequencies are raw counts; cosine similarity makes the
/// choice of normalisation irrelevant.
pub fn cider(items: &[CiderItem]) -> Result<CiderScores, CiderError> {
    if items.is_empty() {
        return Err(CiderError::EmptyCorpus);
    }
    if let Some(i) = items.iter().position(|it| it.references.is_empty()) {
        return Err(CiderError::NoReferences(i));
    }
    let log_n = (items.len() as f64).ln();
    let mut per_item = vec![0.0; items.len()];
    for n in 1..=CIDER_MAX_N {
        let mut df: HashMap<&[String], usize> = HashMap::new();
        for item in items {
            let grams: HashSet<&[String]> = item.references.iter().flat_map(|r| r.tokens.windows(n)).collect();
            for g in grams {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        let idf: HashMap<&[String], f64> = df.into_iter().map(|(g, d)| (g, log_n - (d as f64).ln())).collect();
        for (score, item) in per_item.iter_mut().zip(items) {
            let cand = tfidf(&item.candidate.tokens, n, &idf, log_n);
            let sim: f64 = item.references.iter().map(|r| cosine(&cand, &tfidf(&r.tokens, n, &idf, log_n))).sum();
            *score += sim / item.references.len() as f64;
        }
    }
    for score in &mut per_item {
        *score = *score / CIDER_MAX_N as f64 * SCALE;
    }
    let mean = per_item.iter().sum::<f64>() / per_item.len() as f64;
    Ok(CiderScores { per_item, mean, degenerate_idf: items.len() == 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tokenize;

    fn item(c: &str, r: &str) -> CiderItem {
        CiderItem { candidate: tokenize(c), references: vec![tokenize(r)] }
    }

    #[test]
    fn single_item_is_degenerate() {
        let s = cider(&[item("fix the parser", "fix the parser")]).unwrap();
        assert_eq!(s.per_item, [0.0]);
        assert!(s.degenerate_idf);
    }

    #[test]
    fn identical_item_in_disjoint_corpus_scores_ten() {
        let s = cider(&[item("fix the parser now", "fix the parser now"), item("add docs", "update readme")]).unwrap();
        assert!((s.per_item[0] - 10.0).abs() < 1e-12);
        assert_eq!(s.per_item[1], 0.0);
        assert!(!s.degenerate_idf);
    }

    #[test]
    fn short_candidate_loses_higher_orders() {
        // Two tokens: only n = 1, 2 contribute.
        let s = cider(&[item("fix parser", "fix parser"), item("add docs", "update readme")]).unwrap();
        assert!((s.per_item[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(cider(&[]), Err(CiderError::EmptyCorpus));
        let bad = CiderItem { candidate: tokenize("x"), references: vec![] };
        assert_eq!(cider(&[bad]), Err(CiderError::NoReferences(0)));
    }
}
