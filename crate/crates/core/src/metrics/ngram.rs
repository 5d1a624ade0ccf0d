use std::collections::HashMap;

use super::TokenizedText;

pub const GLEU_MAX_N: usize = 4;

/// Counts of every n-gram of exactly length `n`.
pub fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Sentence-level Google BLEU: n-grams of lengths `1..=max_n` are pooled;
/// the score is the smaller of pooled precision and pooled recall.
pub fn gleu(candidate: &TokenizedText, reference: &TokenizedText, max_n: usize) -> f64 {
    let (mut matches, mut cand_total, mut ref_total) = (0usize, 0usize, 0usize);
    for n in 1..=max_n {
        let cand = ngram_counts(&candidate.tokens, n);
        let refs = ngram_counts(&reference.tokens, n);
        cand_total += candidate.len().saturating_sub(n - 1);
        ref_total += reference.len().saturating_sub(n - 1);
        matches += cand.iter().map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0))).sum::<usize>();
    }
    if cand_total == 0 || ref_total == 0 {
        return 0.0;
    }
    (matches as f64 / cand_total as f64).min(matches as f64 / ref_total as f64)
}
