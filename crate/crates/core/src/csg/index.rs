use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use super::{try_parse_definitions, CsgError, DefinitionRecord};
use crate::canonical;
use crate::lang::{Language, LanguageSet};

/// Directory names never descended into.
const SKIPPED_DIRS: [&str; 2] = [".git", ".c3gen"];
const MANIFEST_FILE: &str = "manifest.json";

/// The definitions of one source file, exactly as persisted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDefinitions {
    pub file: String,
    pub language: Language,
    pub entities: Vec<DefinitionRecord>,
}

impl FileDefinitions {
    /// Index of each record's parent, recovered from document order.
    pub fn parent_indices(&self) -> Vec<Option<usize>> {
        let mut open: Vec<usize> = Vec::new();
        let mut parents = Vec::with_capacity(self.entities.len());
        for (i, record) in self.entities.iter().enumerate() {
            while let Some(&top) = open.last() {
                let candidate = &self.entities[top];
                if candidate.contains_span(record) && record.parent.as_deref() == Some(candidate.name.as_str()) {
                    break;
                }
                open.pop();
            }
            parents.push(open.last().copied());
            open.push(i);
        }
        parents
    }

    /// Exclusive end of the pre-order subtree rooted at `i`.
    fn subtree_end(&self, i: usize) -> usize {
        let root = &self.entities[i];
        let mut j = i + 1;
        while j < self.entities.len() && root.contains_span(&self.entities[j]) {
            j += 1;
        }
        j
    }

    /// Indices of every definition containing `line`, outermost first.
    pub fn enclosing_chain(&self, line: u32) -> Vec<usize> {
        // Descend: skip whole subtrees that do not contain the line.
        let mut chain = Vec::new();
        let mut i = 0;
        let mut limit = self.entities.len();
        while i < limit {
            let end = self.subtree_end(i);
            if self.entities[i].contains_line(line) {
                chain.push(i);
                i += 1;
                limit = end;
            } else {
                i = end;
            }
        }
        chain
    }

    pub fn innermost(&self, line: u32) -> Option<&DefinitionRecord> {
        self.enclosing_chain(line).last().map(|&i| &self.entities[i])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DefinitionIndex {
    entries: BTreeMap<String, FileDefinitions>,
    /// SHA-256 of each indexed file's bytes.
    digests: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub language: Language,
    pub digest: String,
    pub entities: usize,
}

/// Top-level `manifest.json` of a persisted index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexManifest {
    pub format: u32,
    pub files: BTreeMap<String, ManifestEntry>,
    pub tree_digest: String,
}

impl DefinitionIndex {
    pub fn insert(&mut self, defs: FileDefinitions, digest: Option<String>) {
        if let Some(d) = digest {
            self.digests.insert(defs.file.clone(), d);
        }
        self.entries.insert(defs.file.clone(), defs);
    }

    pub fn get(&self, file: &str) -> Option<&FileDefinitions> {
        self.entries.get(file)
    }

    pub fn files(&self) -> impl Iterator<Item = &FileDefinitions> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn definition_count(&self) -> usize {
        self.entries.values().map(|f| f.entities.len()).sum()
    }

    /// Digest over `(path, content digest)` of every indexed file.
    pub fn tree_digest(&self) -> String {
        digest_pairs(self.digests.iter())
    }

    pub fn manifest(&self) -> IndexManifest {
        IndexManifest {
            format: 1,
            files: self
                .entries
                .values()
                .map(|f| {
                    let entry = ManifestEntry {
                        language: f.language,
                        digest: self.digests.get(&f.file).cloned().unwrap_or_default(),
                        entities: f.entities.len(),
                    };
                    (f.file.clone(), entry)
                })
                .collect(),
            tree_digest: self.tree_digest(),
        }
    }

    /// Per-file documents keyed by the relative path they are stored under.
    pub fn documents(&self) -> BTreeMap<String, String> {
        self.entries
            .values()
            .map(|f| (format!("{}.json", f.file), canonical::to_document(f).expect("index entries serialize")))
            .collect()
    }

    /// Writes one JSON document per source file mirroring the repository
    /// tree, plus `manifest.json`. Replaces a previous index in `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CsgError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| CsgError::Io { path, source }
        };
        if dir.join(MANIFEST_FILE).is_file() {
            fs::remove_dir_all(dir).map_err(io(dir))?;
        }
        fs::create_dir_all(dir).map_err(io(dir))?;
        for (rel, doc) in self.documents() {
            let path = dir.join(&rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(io(parent))?;
            }
            fs::write(&path, doc).map_err(io(&path))?;
        }
        let manifest = dir.join(MANIFEST_FILE);
        let doc = canonical::to_document(&self.manifest()).expect("manifest serializes");
        fs::write(&manifest, doc).map_err(io(&manifest))
    }

    pub fn read_manifest(dir: &Path) -> Result<IndexManifest, CsgError> {
        let path = dir.join(MANIFEST_FILE);
        let text =
            fs::read_to_string(&path).map_err(|source| CsgError::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text).map_err(|source| CsgError::Format { path: path.display().to_string(), source })
    }

    pub fn load(dir: &Path) -> Result<Self, CsgError> {
        let manifest = Self::read_manifest(dir)?;
        let mut index = DefinitionIndex::default();
        for (file, entry) in manifest.files {
            let path = dir.join(format!("{file}.json"));
            let text = fs::read_to_string(&path)
                .map_err(|source| CsgError::Io { path: path.display().to_string(), source })?;
            let defs: FileDefinitions = serde_json::from_str(&text)
                .map_err(|source| CsgError::Format { path: path.display().to_string(), source })?;
            index.insert(defs, Some(entry.digest));
        }
        Ok(index)
    }
}

fn digest_pairs<'a>(pairs: impl Iterator<Item = (&'a String, &'a String)>) -> String {
    let mut hasher = Sha256::new();
    for (path, digest) in pairs {
        hasher.update(path.as_bytes());
        hasher.update([0]);
        hasher.update(digest.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, Default)]
pub struct IndexOptions {
    pub languages: LanguageSet,
    /// Globs matched against repository-relative paths.
    pub exclude: Vec<String>,
}

impl IndexOptions {
    fn exclude_set(&self) -> Result<GlobSet, CsgError> {
        let mut builder = GlobSetBuilder::new();
        for pattern in &self.exclude {
            builder.add(Glob::new(pattern)?);
        }
        Ok(builder.build()?)
    }
}

#[derive(Debug, Clone, Default)]
pub struct IndexBuild {
    pub index: DefinitionIndex,
    pub warnings: Vec<String>,
}

/// Repository-relative `/`-separated path of every supported source file, sorted.
pub(crate) fn source_files(
    repo_root: &Path,
    options: &IndexOptions,
    warnings: &mut Vec<String>,
) -> Result<Vec<(String, PathBuf, Language)>, CsgError> {
    if !repo_root.is_dir() {
        return Err(CsgError::RepoMissing(repo_root.display().to_string()));
    }
    let exclude = options.exclude_set()?;
    let mut files = Vec::new();
    let walker = WalkDir::new(repo_root).follow_links(false).into_iter().filter_entry(|e| {
        !(e.file_type().is_dir() && e.depth() > 0 && SKIPPED_DIRS.iter().any(|d| e.file_name() == *d))
    });
    for entry in walker {
        let entry = match entry {
            Ok(entry) => entry,
            Err(err) => {
                warnings.push(format!("skipping unreadable entry: {err}"));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let Some(language) = options.languages.detect(entry.path()) else {
            continue;
        };
        let rel = entry.path().strip_prefix(repo_root).expect("walk stays under root");
        let Some(rel) = rel.to_str().map(|s| s.replace('\\', "/")) else {
            warnings.push(format!("skipping non-UTF-8 path {}", rel.display()));
            continue;
        };
        if exclude.is_match(&rel) {
            continue;
        }
        files.push((rel, entry.into_path(), language));
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(files)
}

pub(crate) fn read_source(path: &Path) -> std::io::Result<(String, String)> {
    let bytes = fs::read(path)?;
    let digest = hex::encode(Sha256::digest(&bytes));
    Ok((String::from_utf8_lossy(&bytes).into_owned(), digest))
}

/// Parses every supported file under `repo_root`.
///
/// Definitions, content digest and an optional parse warning.
type ParsedFile = (FileDefinitions, String, Option<String>);

/// Files are parsed in parallel on the current rayon pool; the result does
/// not depend on traversal or scheduling order.
pub fn build_definition_index(repo_root: &Path, options: &IndexOptions) -> Result<IndexBuild, CsgError> {
    let mut warnings = Vec::new();
    let files = source_files(repo_root, options, &mut warnings)?;
    let parsed: Vec<Result<ParsedFile, String>> = files
        .par_iter()
        .map(|(rel, path, language)| {
            let (source, digest) = read_source(path).map_err(|e| format!("skipping unreadable file {rel}: {e}"))?;
            let (entities, warning) = match try_parse_definitions(&source, *language) {
                Some(parsed) => {
                    let warning =
                        parsed.had_errors.then(|| format!("{rel}: syntax errors; definitions may be incomplete"));
                    (parsed.records, warning)
                }
                None => (Vec::new(), Some(format!("{rel}: parse failed; no definitions recorded"))),
            };
            Ok((FileDefinitions { file: rel.clone(), language: *language, entities }, digest, warning))
        })
        .collect();

    let mut index = DefinitionIndex::default();
    for result in parsed {
        match result {
            Ok((defs, digest, warning)) => {
                warnings.extend(warning);
                index.insert(defs, Some(digest));
            }
            Err(warning) => warnings.push(warning),
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(IndexBuild { index, warnings })
}

/// Digest of the current tree, comparable with [`DefinitionIndex::tree_digest`].
pub fn tree_digest(repo_root: &Path, options: &IndexOptions) -> Result<String, CsgError> {
    let mut warnings = Vec::new();
    let files = source_files(repo_root, options, &mut warnings)?;
    let digests: BTreeMap<String, String> =
        files.par_iter().filter_map(|(rel, path, _)| read_source(path).ok().map(|(_, d)| (rel.clone(), d))).collect();
    Ok(digest_pairs(digests.iter()))
}

/// Innermost definition containing `line`; `None` in global scope or for an
/// unindexed file.
pub fn lookup_enclosing_definition<'a>(
    index: &'a DefinitionIndex,
    file: &str,
    line: u32,
) -> Option<&'a DefinitionRecord> {
    index.get(file)?.innermost(line)
}
