//! Definition extraction, the persisted definition index, and per-file
//! code structure graphs.

mod graph;
mod index;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Language;
use crate::syntax;

pub use graph::{build_csg, build_csgs, CodeStructureGraph, DefinitionNode, DiffNode, Edge, NodeId};
pub use index::{
    build_definition_index, lookup_enclosing_definition, tree_digest, DefinitionIndex, FileDefinitions, IndexBuild,
    IndexManifest, IndexOptions,
};
pub(crate) use index::{read_source, source_files};

#[derive(Debug, Error)]
pub enum CsgError {
    #[error("repository root `{0}` does not exist or is not a directory")]
    RepoMissing(String),
    #[error("`{0}` is not in the definition index")]
    NotIndexed(String),
    #[error("invalid exclude pattern: {0}")]
    Exclude(#[from] globset::Error),
    #[error("index I/O at `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed index file `{path}`: {source}")]
    Format {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefinitionKind {
    Function,
    Class,
}

impl fmt::Display for DefinitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefinitionKind::Function => "function",
            DefinitionKind::Class => "class",
        })
    }
}

/// One class or function definition. Lines are 1-based and inclusive.
///
/// The owning file is the key of the [`FileDefinitions`] that holds the record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefinitionRecord {
    pub name: String,
    pub kind: DefinitionKind,
    pub start_line: u32,
    pub end_line: u32,
    /// Name of the enclosing class or function.
    pub parent: Option<String>,
}

impl DefinitionRecord {
    pub fn contains_line(&self, line: u32) -> bool {
        self.start_line <= line && line <= self.end_line
    }

    pub fn contains_span(&self, other: &DefinitionRecord) -> bool {
        self.start_line <= other.start_line && other.end_line <= self.end_line
    }

    pub fn line_count(&self) -> u32 {
        self.end_line - self.start_line + 1
    }
}

/// Outcome of parsing one source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSource {
    pub records: Vec<DefinitionRecord>,
    /// The grammar recovered from syntax errors somewhere in the file.
    pub had_errors: bool,
}

/// Parses all class and function definitions, in document order.
///
/// Returns `None` only when the parser produced no tree at all.
pub fn try_parse_definitions(source: &str, language: Language) -> Option<ParsedSource> {
    let tree = syntax::parse(source, language)?;
    let raw = syntax::definitions(&tree, source, language);
    let records = raw
        .iter()
        .map(|d| DefinitionRecord {
            name: d.name.clone(),
            kind: d.kind,
            start_line: d.start_line,
            end_line: d.end_line,
            parent: d.parent.map(|p| raw[p].name.clone()),
        })
        .collect();
    Some(ParsedSource { records, had_errors: tree.root_node().has_error() })
}

/// Parses definitions; a file the parser cannot handle yields an empty list.
pub fn parse_definitions(source: &str, language: Language) -> Vec<DefinitionRecord> {
    match try_parse_definitions(source, language) {
        Some(parsed) => parsed.records,
        None => {
            log::warn!("{language} parser produced no tree; no definitions recorded");
            Vec::new()
        }
    }
}
