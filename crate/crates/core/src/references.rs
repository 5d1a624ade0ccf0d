//! Second-pass repository scan: every call or instantiation of a modified
//! entity, recorded as diff nodes on the per-file structure graphs.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csg::{read_source, source_files, CodeStructureGraph, CsgError, DefinitionKind, IndexOptions};
use crate::entities::ModifiedEntity;
use crate::lang::Language;
use crate::syntax::{self, SiteKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Call,
    Instantiation,
}

/// Where a modified entity is invoked or instantiated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InvocationRecord {
    pub caller_file: String,
    pub line: u32,
    pub entity_name: String,
    pub entity_kind: DefinitionKind,
    pub reference_kind: ReferenceKind,
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    pub files: IndexOptions,
    /// Keep references that sit inside the referenced entity's own body.
    pub include_self_refs: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanResult {
    /// Sorted by `(caller_file, line, entity_name)`.
    pub records: Vec<InvocationRecord>,
    pub warnings: Vec<String>,
}

struct Targets {
    functions: HashSet<String>,
    classes: HashSet<String>,
}

/// Records for one file's source text.
pub fn scan_source(
    file: &str,
    source: &str,
    language: Language,
    entities: &[ModifiedEntity],
    include_self_refs: bool,
) -> Option<Vec<InvocationRecord>> {
    let targets = Targets {
        functions: entities.iter().filter(|e| e.kind == DefinitionKind::Function).map(|e| e.name.clone()).collect(),
        classes: entities.iter().filter(|e| e.kind == DefinitionKind::Class).map(|e| e.name.clone()).collect(),
    };
    scan_with(file, source, language, &targets, include_self_refs)
}

fn scan_with(
    file: &str,
    source: &str,
    language: Language,
    targets: &Targets,
    include_self_refs: bool,
) -> Option<Vec<InvocationRecord>> {
    // Cheap pre-filter: most files mention no target at all.
    let mentioned = targets.functions.iter().chain(&targets.classes).any(|name| source.contains(name.as_str()));
    if !mentioned {
        return Some(Vec::new());
    }
    let tree = syntax::parse(source, language)?;
    let definitions = syntax::definitions(&tree, source, language);
    let inside_own_body = |name: &str, kind: DefinitionKind, line: u32| {
        definitions.iter().any(|d| d.name == name && d.kind == kind && d.start_line <= line && line <= d.end_line)
    };

    let mut out = Vec::new();
    for site in syntax::sites(&tree, source, language) {
        let mut push = |kind: DefinitionKind, reference_kind: ReferenceKind| {
            if include_self_refs || !inside_own_body(&site.name, kind, site.line) {
                out.push(InvocationRecord {
                    caller_file: file.to_string(),
                    line: site.line,
                    entity_name: site.name.clone(),
                    entity_kind: kind,
                    reference_kind,
                });
            }
        };
        match site.kind {
            SiteKind::Call => {
                if targets.functions.contains(&site.name) {
                    push(DefinitionKind::Function, ReferenceKind::Call);
                }
                // Python instantiates by calling the class.
                if language == Language::Python && targets.classes.contains(&site.name) {
                    push(DefinitionKind::Class, ReferenceKind::Instantiation);
                }
            }
            SiteKind::New => {
                if targets.classes.contains(&site.name) {
                    push(DefinitionKind::Class, ReferenceKind::Instantiation);
                }
            }
        }
    }
    Some(out)
}

/// Scans every supported file under `repo_root` for references to `entities`.
///
/// Matching is by bare name; comments and string literals never match
/// because only call and `new` syntax nodes are considered.
pub fn scan_references(
    repo_root: &Path,
    entities: &[ModifiedEntity],
    options: &ScanOptions,
) -> Result<ScanResult, CsgError> {
    if entities.is_empty() {
        return Ok(ScanResult::default());
    }
    let mut warnings = Vec::new();
    let files = source_files(repo_root, &options.files, &mut warnings)?;
    let targets = Targets {
        functions: entities.iter().filter(|e| e.kind == DefinitionKind::Function).map(|e| e.name.clone()).collect(),
        classes: entities.iter().filter(|e| e.kind == DefinitionKind::Class).map(|e| e.name.clone()).collect(),
    };
    let per_file: Vec<Result<Vec<InvocationRecord>, String>> = files
        .par_iter()
        .map(|(rel, path, language)| {
            let (source, _) = read_source(path).map_err(|e| format!("skipping unreadable file {rel}: {e}"))?;
            scan_with(rel, &source, *language, &targets, options.include_self_refs)
                .ok_or_else(|| format!("{rel}: parse failed; not scanned"))
        })
        .collect();

    let mut records = Vec::new();
    for result in per_file {
        match result {
            Ok(found) => records.extend(found),
            Err(w) => warnings.push(w),
        }
    }
    records.sort();
    records.dedup();
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(ScanResult { records, warnings })
}

/// Structure graphs with diff nodes attached.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedCsgStore {
    pub graphs: BTreeMap<String, CodeStructureGraph>,
    /// Records whose entity has no class/function node in any graph.
    pub unattached: Vec<InvocationRecord>,
}

impl AugmentedCsgStore {
    /// Every recorded invocation of `(name, kind)`, deduplicated and sorted,
    /// including unattached ones.
    pub fn invocations_of(&self, name: &str, kind: DefinitionKind) -> Vec<&InvocationRecord> {
        let mut found: Vec<&InvocationRecord> = self
            .graphs
            .values()
            .flat_map(|g| {
                g.definition_nodes()
                    .filter(|n| n.name == name && n.kind == kind)
                    .flat_map(move |n| g.diff_nodes_of(n.id).map(|d| &d.invocation))
            })
            .chain(self.unattached.iter().filter(|r| r.entity_name == name && r.entity_kind == kind))
            .collect();
        found.sort();
        found.dedup();
        found
    }
}

/// Links each record to every class/function node of the same name and kind,
/// in every graph.
pub fn augment_csgs(
    store: &BTreeMap<String, CodeStructureGraph>,
    records: &[InvocationRecord],
    entities: &[ModifiedEntity],
) -> AugmentedCsgStore {
    let modified: HashSet<(&str, DefinitionKind)> = entities.iter().map(|e| e.key()).collect();
    let mut graphs = store.clone();
    let mut unattached = Vec::new();
    for record in records {
        let key = (record.entity_name.as_str(), record.entity_kind);
        let mut attached = false;
        if modified.contains(&key) {
            for graph in graphs.values_mut() {
                let owners: Vec<_> = graph
                    .definition_nodes()
                    .filter(|n| n.name == record.entity_name && n.kind == record.entity_kind)
                    .map(|n| n.id)
                    .collect();
                for owner in owners {
                    graph.attach(owner, record.clone());
                    attached = true;
                }
            }
        }
        if !attached {
            unattached.push(record.clone());
        }
    }
    AugmentedCsgStore { graphs, unattached }
}
