//! End-to-end retrieval: repository + diff → relevant code context.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::context::{assemble_context, CodeSnippet, ContextCaps, RelevantCodeContext, SnippetExtractor};
use crate::csg::{
    build_csgs, build_definition_index, parse_definitions, tree_digest, CsgError, DefinitionIndex, FileDefinitions,
    IndexOptions,
};
use crate::diff::{parse_unified_diff, reverse_apply, DiffError, DiffSegment};
use crate::entities::{extract_modified_entities, Attribution, EntityOptions, ModifiedEntity};
use crate::references::{augment_csgs, scan_references, InvocationRecord, ScanOptions};

/// Index cache location relative to the repository root.
pub const INDEX_DIR: &str = ".c3gen/index";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Csg(#[from] CsgError),
    #[error("malformed diff: {0}")]
    Diff(#[from] DiffError),
}

#[derive(Debug, Clone)]
pub struct RetrievalOptions {
    pub files: IndexOptions,
    pub attribution: Attribution,
    pub include_self_refs: bool,
    /// Drop snippets that are just the body of a modified entity.
    pub exclude_modified_bodies: bool,
    pub caps: ContextCaps,
    /// Where the index is cached; defaults to `<repo>/.c3gen/index`.
    pub index_dir: Option<PathBuf>,
    /// Reuse a cached index even when the tree digest no longer matches.
    pub no_reindex: bool,
    /// Write a rebuilt index back to the cache.
    pub persist_index: bool,
}

impl Default for RetrievalOptions {
    fn default() -> Self {
        Self {
            files: IndexOptions::default(),
            attribution: Attribution::default(),
            include_self_refs: false,
            exclude_modified_bodies: false,
            caps: ContextCaps::default(),
            index_dir: None,
            no_reindex: false,
            persist_index: true,
        }
    }
}

impl RetrievalOptions {
    pub fn index_dir(&self, repo_root: &Path) -> PathBuf {
        self.index_dir.clone().unwrap_or_else(|| repo_root.join(INDEX_DIR))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSource {
    Cache,
    StaleCache,
    Rebuilt,
}

#[derive(Debug, Clone)]
pub struct LoadedIndex {
    pub index: DefinitionIndex,
    pub source: IndexSource,
    pub warnings: Vec<String>,
}

/// The cached index when its tree digest matches the repository, otherwise
/// a fresh one (written back when `persist_index` is set).
pub fn load_or_build_index(repo_root: &Path, options: &RetrievalOptions) -> Result<LoadedIndex, CsgError> {
    if !repo_root.is_dir() {
        return Err(CsgError::RepoMissing(repo_root.display().to_string()));
    }
    let dir = options.index_dir(repo_root);
    let mut warnings = Vec::new();
    if let Ok(manifest) = DefinitionIndex::read_manifest(&dir) {
        let stale = !options.no_reindex && manifest.tree_digest != tree_digest(repo_root, &options.files)?;
        if !stale {
            match DefinitionIndex::load(&dir) {
                Ok(index) => {
                    let source = if options.no_reindex { IndexSource::StaleCache } else { IndexSource::Cache };
                    return Ok(LoadedIndex { index, source, warnings });
                }
                Err(e) => warnings.push(format!("cached index unusable ({e}); rebuilding")),
            }
        } else {
            log::info!("index at {} is stale; rebuilding", dir.display());
        }
    }
    let built = build_definition_index(repo_root, &options.files)?;
    warnings.extend(built.warnings);
    if options.persist_index {
        built.index.write_to(&dir)?;
    }
    Ok(LoadedIndex { index: built.index, source: IndexSource::Rebuilt, warnings })
}

/// Everything retrieval produced, for inspection and reporting.
#[derive(Debug, Clone, Serialize)]
pub struct Retrieval {
    pub entities: Vec<ModifiedEntity>,
    pub invocations: Vec<InvocationRecord>,
    pub context: RelevantCodeContext,
    pub index_source: IndexSource,
    pub warnings: Vec<String>,
}

/// Definitions of the pre-change side of each segment, rebuilt by undoing
/// the diff against the working tree.
fn old_side_index(
    repo_root: &Path,
    segments: &[DiffSegment],
    options: &RetrievalOptions,
    warnings: &mut Vec<String>,
) -> DefinitionIndex {
    let mut index = DefinitionIndex::default();
    for segment in segments {
        let Some(old_path) = segment.old_path.as_deref() else { continue };
        let Some(language) = options.files.languages.detect(old_path) else { continue };
        if segment.binary || segment.removed_lines() == 0 {
            continue;
        }
        let new_text = match segment.new_path.as_deref() {
            Some(p) => match fs::read(repo_root.join(p)) {
                Ok(bytes) => Some(String::from_utf8_lossy(&bytes).into_owned()),
                Err(_) => continue,
            },
            None => None,
        };
        match reverse_apply(segment, new_text.as_deref()) {
            Some(old_text) => index.insert(
                FileDefinitions {
                    file: old_path.to_string(),
                    language,
                    entities: parse_definitions(&old_text, language),
                },
                None,
            ),
            None => warnings
                .push(format!("{old_path}: diff does not apply to the working tree; removed lines matched textually")),
        }
    }
    index
}

/// Runs diff analysis, reference augmentation and context extraction
/// against the repository's working tree, which is taken to be the
/// post-change state.
pub fn retrieve(repo_root: &Path, diff_text: &str, options: &RetrievalOptions) -> Result<Retrieval, PipelineError> {
    let segments = parse_unified_diff(diff_text)?;
    let loaded = load_or_build_index(repo_root, options)?;
    let index = loaded.index;
    let mut warnings = loaded.warnings;

    for segment in &segments {
        if let Some(path) = segment.new_path.as_deref() {
            if !repo_root.join(path).exists() {
                warnings.push(format!("{path}: named in the diff but absent from the repository"));
            }
        }
    }

    let old_index = old_side_index(repo_root, &segments, options, &mut warnings);
    let entity_options = EntityOptions { attribution: options.attribution, languages: options.files.languages.clone() };
    let extraction = extract_modified_entities(&segments, &index, Some(&old_index), &entity_options);
    warnings.extend(extraction.warnings);
    let entities = extraction.entities;

    let scan_options = ScanOptions { files: options.files.clone(), include_self_refs: options.include_self_refs };
    let scan = scan_references(repo_root, &entities, &scan_options)?;
    warnings.extend(scan.warnings);

    let store = augment_csgs(&build_csgs(&index), &scan.records, &entities);

    // Walk entities in diff order so snippet order encodes priority.
    let mut invocations: Vec<InvocationRecord> = Vec::new();
    let mut seen = HashSet::new();
    for entity in &entities {
        for record in store.invocations_of(&entity.name, entity.kind) {
            if seen.insert(record.clone()) {
                invocations.push(record.clone());
            }
        }
    }

    let mut extractor = SnippetExtractor::new(&index, repo_root);
    let mut snippets: Vec<CodeSnippet> = Vec::with_capacity(invocations.len());
    for record in &invocations {
        match extractor.extract(record) {
            Ok(snippet) => snippets.push(snippet),
            Err(e) => warnings.push(e.to_string()),
        }
    }
    if options.exclude_modified_bodies {
        snippets.retain(|s| !is_modified_body(s, &index, &entities));
    }
    let context = assemble_context(&snippets, options.caps);

    invocations.sort();
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Retrieval { entities, invocations, context, index_source: loaded.source, warnings })
}

/// The snippet is exactly the definition of one of the modified entities.
fn is_modified_body(snippet: &CodeSnippet, index: &DefinitionIndex, entities: &[ModifiedEntity]) -> bool {
    let Some(defs) = index.get(&snippet.file) else { return false };
    snippet.reason.is_enclosing()
        && defs.entities.iter().any(|d| {
            d.start_line == snippet.start_line
                && d.end_line == snippet.end_line
                && entities
                    .iter()
                    .any(|e| e.key() == (d.name.as_str(), d.kind) && e.origin_files.contains(&snippet.file))
        })
}
