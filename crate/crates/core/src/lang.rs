//! Supported languages and the extension map that selects them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported language `{0}`")]
pub struct UnsupportedLanguage(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Python,
    Java,
    JavaScript,
    Cpp,
}

impl Language {
    pub const ALL: [Language; 4] = [Language::Python, Language::Java, Language::JavaScript, Language::Cpp];

    /// Tag used in index files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::Java => "java",
            Language::JavaScript => "javascript",
            Language::Cpp => "cpp",
        }
    }

    pub fn default_extensions(self) -> &'static [&'static str] {
        match self {
            Language::Python => &["py", "pyi"],
            Language::Java => &["java"],
            Language::JavaScript => &["js", "jsx", "mjs", "cjs"],
            Language::Cpp => &["cpp", "cc", "cxx", "c++", "hpp", "hh", "hxx", "h"],
        }
    }

    pub(crate) fn grammar(self) -> tree_sitter::Language {
        match self {
            Language::Python => tree_sitter_python::LANGUAGE.into(),
            Language::Java => tree_sitter_java::LANGUAGE.into(),
            Language::JavaScript => tree_sitter_javascript::LANGUAGE.into(),
            Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Language {
    type Err = UnsupportedLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(Language::Python),
            "java" => Ok(Language::Java),
            "javascript" | "js" => Ok(Language::JavaScript),
            "cpp" | "c++" | "cxx" => Ok(Language::Cpp),
            other => Err(UnsupportedLanguage(other.to_string())),
        }
    }
}

/// The configured set of languages, keyed by lowercase file extension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageSet {
    extensions: BTreeMap<String, Language>,
}

impl Default for LanguageSet {
    fn default() -> Self {
        Self::new(Language::ALL)
    }
}

impl LanguageSet {
    pub fn new(languages: impl IntoIterator<Item = Language>) -> Self {
        let mut extensions = BTreeMap::new();
        for language in languages {
            for ext in language.default_extensions() {
                extensions.insert((*ext).to_string(), language);
            }
        }
        Self { extensions }
    }

    /// Parses a comma-separated list such as `python,java`.
    pub fn parse_list(list: &str) -> Result<Self, UnsupportedLanguage> {
        let languages =
            list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<Vec<Language>, _>>()?;
        Ok(Self::new(languages))
    }

    /// Maps an extra extension (without the dot) to a language.
    pub fn with_extension(mut self, ext: &str, language: Language) -> Self {
        self.extensions.insert(ext.trim_start_matches('.').to_ascii_lowercase(), language);
        self
    }

    pub fn languages(&self) -> BTreeSet<Language> {
        self.extensions.values().copied().collect()
    }

    pub fn contains(&self, language: Language) -> bool {
        self.extensions.values().any(|l| *l == language)
    }

    pub fn extensions(&self) -> impl Iterator<Item = &str> {
        self.extensions.keys().map(String::as_str)
    }

    /// Case-insensitive extension lookup.
    pub fn detect(&self, path: impl AsRef<Path>) -> Option<Language> {
        let ext = path.as_ref().extension()?.to_str()?.to_ascii_lowercase();
        self.extensions.get(&ext).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.extensions.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_by_extension_case_insensitively() {
        let set = LanguageSet::default();
        assert_eq!(set.detect("a/b/Calc.PY"), Some(Language::Python));
        assert_eq!(set.detect("x.java"), Some(Language::Java));
        assert_eq!(set.detect("x.hpp"), Some(Language::Cpp));
        assert_eq!(set.detect("README.md"), None);
        assert_eq!(set.detect("Makefile"), None);
    }

    #[test]
    fn parse_list_restricts_languages() {
        let set = LanguageSet::parse_list("python, js").unwrap();
        assert_eq!(set.languages(), [Language::Python, Language::JavaScript].into_iter().collect());
        assert_eq!(set.detect("x.java"), None);
        assert!(LanguageSet::parse_list("cobol").is_err());
    }

    #[test]
    fn tags_round_trip() {
        for language in Language::ALL {
            assert_eq!(language.tag().parse::<Language>().unwrap(), language);
        }
    }
}
