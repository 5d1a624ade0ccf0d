use std::sync::LazyLock;

use rust_stemmers::{Algorithm, Stemmer};

use super::TokenizedText;

const ALPHA: f64 = 0.9;
const BETA: f64 = 3.0;
const GAMMA: f64 = 0.5;

static STEMMER: LazyLock<Stemmer> = LazyLock::new(|| Stemmer::create(Algorithm::English));

/// Matched `(candidate index, reference index)` pairs, sorted by candidate index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alignment {
    pub pairs: Vec<(usize, usize)>,
}

impl Alignment {
    /// Runs of matches contiguous in both texts.
    pub fn chunks(&self) -> usize {
        if self.pairs.is_empty() {
            return 0;
        }
        1 + self.pairs.windows(2).filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1)).count()
    }
}

/// One matching stage over `forms` (exact tokens or stems). A candidate
/// token prefers the reference slot right after its predecessor's match, so
/// contiguous runs stay contiguous; otherwise the first free slot.
fn match_stage(cand: &[String], refs: &[String], cand_used: &mut [Option<usize>], ref_used: &mut [bool]) {
    for i in 0..cand.len() {
        if cand_used[i].is_some() {
            continue;
        }
        let follow = i.checked_sub(1).and_then(|p| cand_used[p]).map(|j| j + 1);
        let pick = follow
            .filter(|&j| j < refs.len() && !ref_used[j] && refs[j] == cand[i])
            .or_else(|| (0..refs.len()).find(|&j| !ref_used[j] && refs[j] == cand[i]));
        if let Some(j) = pick {
            cand_used[i] = Some(j);
            ref_used[j] = true;
        }
    }
}

pub fn align(candidate: &TokenizedText, reference: &TokenizedText) -> Alignment {
    let mut cand_used = vec![None; candidate.len()];
    let mut ref_used = vec![false; reference.len()];
    match_stage(&candidate.tokens, &reference.tokens, &mut cand_used, &mut ref_used);
    let stem = |t: &TokenizedText| t.tokens.iter().map(|w| STEMMER.stem(w).into_owned()).collect::<Vec<_>>();
    match_stage(&stem(candidate), &stem(reference), &mut cand_used, &mut ref_used);
    Alignment { pairs: cand_used.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i, j))).collect() }
}

/// METEOR with exact then stemmed unigram matching and the standard
/// parameters (α = 0.9, β = 3, γ = 0.5). No synonym stage.
pub fn meteor(candidate: &TokenizedText, reference: &TokenizedText) -> f64 {
    let alignment = align(candidate, reference);
    let matches = alignment.pairs.len();
    if matches == 0 {
        return 0.0;
    }
    let precision = matches as f64 / candidate.len() as f64;
    let recall = matches as f64 / reference.len() as f64;
    let f_mean = precision * recall / (ALPHA * precision + (1.0 - ALPHA) * recall);
    let penalty = GAMMA * (alignment.chunks() as f64 / matches as f64).powf(BETA);
    f_mean * (1.0 - penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tokenize;

    fn m(c: &str, r: &str) -> f64 {
        meteor(&tokenize(c), &tokenize(r))
    }

    #[test]
    fn identity_value() {
        assert_eq!(m("fix", "fix"), 0.5);
        let five = "a b c d e";
        assert!((m(five, five) - (1.0 - 0.5 / 125.0)).abs() < 1e-12);
    }

    #[test]
    fn add_a_test() {
        let f_mean = 10.0 * (2.0 / 3.0) / (2.0 / 3.0 + 9.0);
        assert!((m("add test", "add a test") - f_mean * 0.5).abs() < 1e-12);
        assert!((m("add test", "add a test") - 0.3448).abs() < 1e-4);
    }

    #[test]
    fn stems_match_after_exact() {
        let a = align(&tokenize("fixes parsing"), &tokenize("fix parse"));
        assert_eq!(a.pairs, [(0, 0), (1, 1)]);
        assert_eq!(m("added tests", "remove docs"), 0.0);
    }

    #[test]
    fn repeated_words_align_contiguously() {
        let a = align(&tokenize("the fix the bug"), &tokenize("the fix the bug"));
        assert_eq!(a.chunks(), 1);
    }
}
