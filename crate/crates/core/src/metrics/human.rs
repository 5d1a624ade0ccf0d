use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HumanEvalError {
    #[error("{field} score {value} is outside 1-5")]
    ScoreOutOfRange { field: &'static str, value: u8 },
    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("permutation does not match the candidate list")]
    BadPermutation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub candidate_id: String,
    pub text: String,
    /// The system that produced the text; not shown to raters.
    pub hidden_source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaterScore {
    pub rater: String,
    pub candidate_id: String,
    pub clarity: u8,
    pub completeness: u8,
    pub correctness: u8,
}

impl RaterScore {
    pub fn validate(&self) -> Result<(), HumanEvalError> {
        for (field, value) in
            [("clarity", self.clarity), ("completeness", self.completeness), ("correctness", self.correctness)]
        {
            if !(1..=5).contains(&value) {
                return Err(HumanEvalError::ScoreOutOfRange { field, value });
            }
        }
        Ok(())
    }
}

/// One commit's candidates in the order raters see them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanEvalItem {
    pub commit_id: String,
    pub candidates: Vec<CandidateEntry>,
    /// `permutation[i]` is the original position of `candidates[i]`.
    pub permutation: Vec<usize>,
    #[serde(default)]
    pub scores: Vec<RaterScore>,
}

impl HumanEvalItem {
    /// Shuffles `(source, text)` pairs with a seeded generator.
    pub fn new(commit_id: &str, sources: &[(String, String)], seed: u64) -> Self {
        let mut permutation: Vec<usize> = (0..sources.len()).collect();
        permutation.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let candidates = permutation
            .iter()
            .enumerate()
            .map(|(shown, &orig)| CandidateEntry {
                candidate_id: format!("{commit_id}-{}", (b'A' + (shown % 26) as u8) as char),
                text: sources[orig].1.clone(),
                hidden_source: sources[orig].0.clone(),
            })
            .collect();
        Self { commit_id: commit_id.to_string(), candidates, permutation, scores: Vec::new() }
    }

    pub fn record(&mut self, score: RaterScore) -> Result<(), HumanEvalError> {
        score.validate()?;
        if !self.candidates.iter().any(|c| c.candidate_id == score.candidate_id) {
            return Err(HumanEvalError::UnknownCandidate(score.candidate_id));
        }
        self.scores.push(score);
        Ok(())
    }

    /// Checks a loaded session.
    pub fn validate(&self) -> Result<(), HumanEvalError> {
        let mut sorted = self.permutation.clone();
        sorted.sort_unstable();
        if sorted != (0..self.candidates.len()).collect::<Vec<_>>() {
            return Err(HumanEvalError::BadPermutation);
        }
        for s in &self.scores {
            s.validate()?;
            if !self.candidates.iter().any(|c| c.candidate_id == s.candidate_id) {
                return Err(HumanEvalError::UnknownCandidate(s.candidate_id.clone()));
            }
        }
        Ok(())
    }

    /// Candidates back in submission order.
    pub fn derandomized(&self) -> Vec<&CandidateEntry> {
        let mut out: Vec<(usize, &CandidateEntry)> = self.permutation.iter().copied().zip(&self.candidates).collect();
        out.sort_by_key(|(orig, _)| *orig);
        out.into_iter().map(|(_, c)| c).collect()
    }

    /// Mean (clarity, completeness, correctness) per hidden source.
    pub fn means_by_source(&self) -> BTreeMap<String, (f64, f64, f64)> {
        let mut acc: BTreeMap<String, (f64, f64, f64, usize)> = BTreeMap::new();
        for s in &self.scores {
            let Some(c) = self.candidates.iter().find(|c| c.candidate_id == s.candidate_id) else { continue };
            let e = acc.entry(c.hidden_source.clone()).or_default();
            e.0 += f64::from(s.clarity);
            e.1 += f64::from(s.completeness);
            e.2 += f64::from(s.correctness);
            e.3 += 1;
        }
        acc.into_iter().map(|(k, (a, b, c, n))| (k, (a / n as f64, b / n as f64, c / n as f64))).collect()
    }
}
