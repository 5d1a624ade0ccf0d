use serde::{Deserialize, Serialize};

use super::TokenizedText;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// Length of the longest common subsequence, in O(|a|·|b|) time and
/// O(min) space.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut row = vec![0usize; short.len() + 1];
    for x in long {
        let mut diag = 0;
        for (j, y) in short.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { above.max(row[j]) };
            diag = above;
        }
    }
    row[short.len()]
}

/// ROUGE-L with β = 1.
pub fn rouge_l(candidate: &TokenizedText, reference: &TokenizedText) -> RougeScore {
    let lcs = lcs_len(&candidate.tokens, &reference.tokens);
    if lcs == 0 {
        return RougeScore { precision: 0.0, recall: 0.0, f: 0.0 };
    }
    let precision = lcs as f64 / candidate.len() as f64;
    let recall = lcs as f64 / reference.len() as f64;
    RougeScore { precision, recall, f: 2.0 * precision * recall / (precision + recall) }
}
