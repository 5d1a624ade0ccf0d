//! Settings file. Every key is optional; flags and environment variables
//! win over it, and built-in defaults fill whatever is left.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub retrieval: RetrievalSection,
    #[serde(default)]
    pub backend: BackendSection,
    #[serde(default)]
    pub generation: GenerationSection,
    #[serde(default)]
    pub corpus: CorpusSection,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSection {
    pub languages: Option<Vec<String>>,
    pub exclude: Option<Vec<String>>,
    pub max_snippets: Option<usize>,
    pub max_total_lines: Option<usize>,
    pub include_self_refs: Option<bool>,
    pub exclude_modified_bodies: Option<bool>,
    pub attribution: Option<String>,
}

/// No key or token fields: secrets come from the environment only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub timeout_secs: Option<f64>,
    pub max_retries: Option<u32>,
    pub backoff_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationSection {
    pub template: Option<String>,
    pub max_prompt_chars: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub min_words: Option<usize>,
    pub max_words: Option<usize>,
    pub max_changed_lines: Option<usize>,
    pub languages: Option<Vec<String>>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
