//! Snippet extraction around invocation sites and assembly of the merged
//! relevant-code context.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csg::{DefinitionIndex, DefinitionKind};
use crate::references::InvocationRecord;

/// Lines taken on each side of an invocation in global scope.
pub const WINDOW_RADIUS: u32 = 25;
pub const DEFAULT_MAX_SNIPPETS: usize = 10;
pub const DEFAULT_MAX_TOTAL_LINES: usize = 1000;

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("cannot read `{}`: {source}", record.caller_file)]
    Unreadable {
        record: InvocationRecord,
        #[source]
        source: std::io::Error,
    },
    #[error("line {} is outside `{}` ({line_count} lines); the index may be stale", record.line, record.caller_file)]
    OutOfRange { record: InvocationRecord, line_count: u32 },
}

impl ExtractionError {
    pub fn record(&self) -> &InvocationRecord {
        match self {
            ExtractionError::Unreadable { record, .. } | ExtractionError::OutOfRange { record, .. } => record,
        }
    }
}

/// Why a snippet covers the lines it does. Ordered from least to most specific.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnippetReason {
    Window,
    EnclosingClass,
    EnclosingFunction,
}

impl SnippetReason {
    pub fn is_enclosing(self) -> bool {
        self != SnippetReason::Window
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityRef {
    pub name: String,
    pub kind: DefinitionKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSnippet {
    pub file: String,
    pub start_line: u32,
    pub end_line: u32,
    /// The exact source lines, terminators included.
    pub text: String,
    pub reason: SnippetReason,
    pub for_entity: EntityRef,
}

impl CodeSnippet {
    pub fn line_count(&self) -> usize {
        (self.end_line - self.start_line + 1) as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevantCodeContext {
    pub snippets: Vec<CodeSnippet>,
    pub total_lines: usize,
    pub truncated: bool,
}

impl RelevantCodeContext {
    pub fn is_empty(&self) -> bool {
        self.snippets.is_empty()
    }
}

/// A source file split into lines without copying.
#[derive(Debug, Clone)]
pub struct SourceLines {
    text: String,
    /// Byte offset of each line start, plus `text.len()` as sentinel.
    starts: Vec<usize>,
}

impl SourceLines {
    pub fn new(text: String) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        if *starts.last().expect("non-empty") != text.len() {
            starts.push(text.len());
        }
        Self { text, starts }
    }

    pub fn line_count(&self) -> u32 {
        (self.starts.len() - 1) as u32
    }

    /// Lines `start..=end` (1-based), terminators included.
    pub fn slice(&self, start: u32, end: u32) -> &str {
        &self.text[self.starts[start as usize - 1]..self.starts[end as usize]]
    }
}

fn snippet_from(
    record: &InvocationRecord,
    index: &DefinitionIndex,
    source: &SourceLines,
) -> Result<CodeSnippet, ExtractionError> {
    let line_count = source.line_count();
    if record.line == 0 || record.line > line_count {
        return Err(ExtractionError::OutOfRange { record: record.clone(), line_count });
    }
    let enclosing = index.get(&record.caller_file).and_then(|f| f.innermost(record.line));
    let (start_line, end_line, reason) = match enclosing {
        Some(def) => {
            if def.end_line > line_count {
                return Err(ExtractionError::OutOfRange { record: record.clone(), line_count });
            }
            let reason = match def.kind {
                DefinitionKind::Function => SnippetReason::EnclosingFunction,
                DefinitionKind::Class => SnippetReason::EnclosingClass,
            };
            (def.start_line, def.end_line, reason)
        }
        None => (
            record.line.saturating_sub(WINDOW_RADIUS).max(1),
            (record.line + WINDOW_RADIUS).min(line_count),
            SnippetReason::Window,
        ),
    };
    Ok(CodeSnippet {
        file: record.caller_file.clone(),
        start_line,
        end_line,
        text: source.slice(start_line, end_line).to_string(),
        reason,
        for_entity: EntityRef { name: record.entity_name.clone(), kind: record.entity_kind },
    })
}

/// The enclosing definition body of the invocation, or a window of
/// [`WINDOW_RADIUS`] lines either side when it sits in global scope.
pub fn extract_snippet(
    record: &InvocationRecord,
    index: &DefinitionIndex,
    repo_root: &Path,
) -> Result<CodeSnippet, ExtractionError> {
    let bytes = fs::read(repo_root.join(&record.caller_file))
        .map_err(|source| ExtractionError::Unreadable { record: record.clone(), source })?;
    let source = SourceLines::new(String::from_utf8_lossy(&bytes).into_owned());
    snippet_from(record, index, &source)
}

/// Extracts many snippets, reading each caller file once.
pub struct SnippetExtractor<'a> {
    index: &'a DefinitionIndex,
    repo_root: &'a Path,
    cache: HashMap<String, Arc<SourceLines>>,
}

impl<'a> SnippetExtractor<'a> {
    pub fn new(index: &'a DefinitionIndex, repo_root: &'a Path) -> Self {
        Self { index, repo_root, cache: HashMap::new() }
    }

    pub fn extract(&mut self, record: &InvocationRecord) -> Result<CodeSnippet, ExtractionError> {
        let source = match self.cache.get(&record.caller_file) {
            Some(source) => Arc::clone(source),
            None => {
                let bytes = fs::read(self.repo_root.join(&record.caller_file))
                    .map_err(|source| ExtractionError::Unreadable { record: record.clone(), source })?;
                let source = Arc::new(SourceLines::new(String::from_utf8_lossy(&bytes).into_owned()));
                self.cache.insert(record.caller_file.clone(), Arc::clone(&source));
                source
            }
        };
        snippet_from(record, self.index, &source)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextCaps {
    pub max_snippets: usize,
    pub max_total_lines: usize,
}

impl Default for ContextCaps {
    fn default() -> Self {
        Self { max_snippets: DEFAULT_MAX_SNIPPETS, max_total_lines: DEFAULT_MAX_TOTAL_LINES }
    }
}

struct Merged {
    snippet: CodeSnippet,
    /// Earliest input position among the merged snippets.
    order: usize,
}

/// Merges overlapping or adjacent snippets of the same file, applies the
/// caps, and sorts by `(file, start_line)`.
///
/// Input order is diff order. When a cap applies, snippets are dropped from
/// the tail of the priority order: enclosing-definition snippets first, then
/// windows, each in diff order.
pub fn assemble_context(snippets: &[CodeSnippet], caps: ContextCaps) -> RelevantCodeContext {
    let mut by_file: BTreeMap<&str, Vec<(usize, &CodeSnippet)>> = BTreeMap::new();
    for (order, snippet) in snippets.iter().enumerate() {
        by_file.entry(&snippet.file).or_default().push((order, snippet));
    }

    let mut merged: Vec<Merged> = Vec::new();
    for (_, mut group) in by_file {
        group.sort_by_key(|(order, s)| (s.start_line, s.end_line, *order));
        let mut run: Vec<(usize, &CodeSnippet)> = Vec::new();
        let mut run_end = 0;
        for item in group {
            if !run.is_empty() && item.1.start_line > run_end + 1 {
                merged.push(merge_run(&run));
                run.clear();
            }
            run_end = if run.is_empty() { item.1.end_line } else { run_end.max(item.1.end_line) };
            run.push(item);
        }
        if !run.is_empty() {
            merged.push(merge_run(&run));
        }
    }

    let mut priority: Vec<usize> = (0..merged.len()).collect();
    priority.sort_by_key(|&i| (!merged[i].snippet.reason.is_enclosing(), merged[i].order));
    let mut total: usize = merged.iter().map(|m| m.snippet.line_count()).sum();
    let mut kept = priority.len();
    while kept > 0 && (kept > caps.max_snippets || total > caps.max_total_lines) {
        kept -= 1;
        total -= merged[priority[kept]].snippet.line_count();
    }
    let truncated = kept < merged.len();
    let mut retained: Vec<bool> = vec![false; merged.len()];
    for &i in &priority[..kept] {
        retained[i] = true;
    }

    let mut snippets: Vec<CodeSnippet> =
        merged.into_iter().zip(retained).filter(|(_, keep)| *keep).map(|(m, _)| m.snippet).collect();
    snippets.sort_by(|a, b| (a.file.as_str(), a.start_line).cmp(&(b.file.as_str(), b.start_line)));
    RelevantCodeContext { total_lines: snippets.iter().map(CodeSnippet::line_count).sum(), snippets, truncated }
}

fn merge_run(run: &[(usize, &CodeSnippet)]) -> Merged {
    let order = run.iter().map(|(o, _)| *o).min().expect("non-empty run");
    if let [(order, only)] = run {
        return Merged { snippet: (*only).clone(), order: *order };
    }
    let start = run.iter().map(|(_, s)| s.start_line).min().expect("non-empty run");
    let end = run.iter().map(|(_, s)| s.end_line).max().expect("non-empty run");

    // Each line comes from the first snippet (in sorted order) covering it.
    let mut lines: Vec<Option<&str>> = vec![None; (end - start + 1) as usize];
    for (_, s) in run {
        for (offset, line) in s.text.split_inclusive('\n').enumerate() {
            let slot = &mut lines[(s.start_line - start) as usize + offset];
            slot.get_or_insert(line);
        }
    }
    let text: String = lines.into_iter().map(|l| l.unwrap_or("\n")).collect();

    // Most specific reason wins; ties go to the earliest snippet in diff order.
    let (_, lead) = run.iter().min_by_key(|(o, s)| (std::cmp::Reverse(s.reason), *o)).expect("non-empty run");
    Merged {
        snippet: CodeSnippet {
            file: lead.file.clone(),
            start_line: start,
            end_line: end,
            text,
            reason: lead.reason,
            for_entity: lead.for_entity.clone(),
        },
        order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csg::{parse_definitions, FileDefinitions};
    use crate::lang::Language;
    use crate::references::ReferenceKind;

    fn numbered(n: u32) -> String {
        (1..=n).map(|i| format!("line {i}\n")).collect()
    }

    fn record(file: &str, line: u32) -> InvocationRecord {
        InvocationRecord {
            caller_file: file.into(),
            line,
            entity_name: "f".into(),
            entity_kind: DefinitionKind::Function,
            reference_kind: ReferenceKind::Call,
        }
    }

    fn window(file: &str, start: u32, end: u32) -> CodeSnippet {
        CodeSnippet {
            file: file.into(),
            start_line: start,
            end_line: end,
            text: (start..=end).map(|i| format!("line {i}\n")).collect(),
            reason: SnippetReason::Window,
            for_entity: EntityRef { name: "f".into(), kind: DefinitionKind::Function },
        }
    }

    #[test]
    fn source_lines_slice_keeps_terminators() {
        let s = SourceLines::new("a\nb\r\nc".into());
        assert_eq!(s.line_count(), 3);
        assert_eq!(s.slice(2, 3), "b\r\nc");
        assert_eq!(SourceLines::new(String::new()).line_count(), 0);
        assert_eq!(SourceLines::new("x\n".into()).line_count(), 1);
    }

    #[test]
    fn enclosing_function_snippet() {
        let dir = tempfile::tempdir().unwrap();
        let mut src = String::from("x = 1\n\n\n\n");
        src.push_str("def f():\n");
        for i in 0..15 {
            src.push_str(&format!("    a{i} = {i}\n"));
        }
        src.push_str("\ny = 2\n");
        fs::write(dir.path().join("m.py"), &src).unwrap();
        let mut index = DefinitionIndex::default();
        index.insert(
            FileDefinitions {
                file: "m.py".into(),
                language: Language::Python,
                entities: parse_definitions(&src, Language::Python),
            },
            None,
        );
        let snippet = extract_snippet(&record("m.py", 12), &index, dir.path()).unwrap();
        assert_eq!((snippet.start_line, snippet.end_line, snippet.reason), (5, 20, SnippetReason::EnclosingFunction));
        assert_eq!(snippet.text.lines().count(), 16);
    }

    #[test]
    fn global_scope_window_and_clamping() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("big.py"), numbered(500)).unwrap();
        fs::write(dir.path().join("small.py"), numbered(30)).unwrap();
        let index = DefinitionIndex::default();

        let s = extract_snippet(&record("big.py", 100), &index, dir.path()).unwrap();
        assert_eq!((s.start_line, s.end_line, s.reason), (75, 125, SnippetReason::Window));
        assert_eq!(s.line_count(), 51);
        assert!(s.text.starts_with("line 75\n") && s.text.ends_with("line 125\n"));

        let s = extract_snippet(&record("small.py", 10), &index, dir.path()).unwrap();
        assert_eq!((s.start_line, s.end_line), (1, 30));
    }

    #[test]
    fn unreadable_and_out_of_range() {
        let dir = tempfile::tempdir().unwrap();
        let index = DefinitionIndex::default();
        let err = extract_snippet(&record("missing.py", 1), &index, dir.path()).unwrap_err();
        assert!(matches!(err, ExtractionError::Unreadable { .. }));
        assert_eq!(err.record().caller_file, "missing.py");
        fs::write(dir.path().join("s.py"), numbered(3)).unwrap();
        assert!(matches!(
            extract_snippet(&record("s.py", 4), &index, dir.path()),
            Err(ExtractionError::OutOfRange { line_count: 3, .. })
        ));
    }

    #[test]
    fn overlapping_windows_merge() {
        let ctx = assemble_context(&[window("a.py", 10, 60), window("a.py", 40, 90)], ContextCaps::default());
        assert_eq!(ctx.snippets.len(), 1);
        assert_eq!((ctx.snippets[0].start_line, ctx.snippets[0].end_line), (10, 90));
        assert_eq!(ctx.snippets[0].text, window("a.py", 10, 90).text);
        assert_eq!(ctx.total_lines, 81);
        assert!(!ctx.truncated);
    }

    #[test]
    fn adjacent_snippets_merge_and_keep_specific_reason() {
        let mut enclosing = window("a.py", 11, 20);
        enclosing.reason = SnippetReason::EnclosingFunction;
        enclosing.for_entity.name = "g".into();
        let ctx = assemble_context(&[window("a.py", 1, 10), enclosing], ContextCaps::default());
        assert_eq!(ctx.snippets.len(), 1);
        assert_eq!(ctx.snippets[0].reason, SnippetReason::EnclosingFunction);
        assert_eq!(ctx.snippets[0].for_entity.name, "g");
    }

    #[test]
    fn empty_input() {
        let ctx = assemble_context(&[], ContextCaps::default());
        assert_eq!(ctx, RelevantCodeContext { snippets: vec![], total_lines: 0, truncated: false });
    }

    #[test]
    fn cap_drops_windows_before_enclosing_and_later_before_earlier() {
        // 12 disjoint snippets across files; the last two in diff order are enclosing.
        let mut input: Vec<CodeSnippet> = (0..12).map(|i| window(&format!("f{i:02}.py"), 1, 3)).collect();
        input[10].reason = SnippetReason::EnclosingClass;
        input[11].reason = SnippetReason::EnclosingFunction;
        let ctx = assemble_context(&input, ContextCaps { max_snippets: 10, max_total_lines: 1000 });
        assert!(ctx.truncated);
        let files: Vec<&str> = ctx.snippets.iter().map(|s| s.file.as_str()).collect();
        assert_eq!(
            files,
            ["f00.py", "f01.py", "f02.py", "f03.py", "f04.py", "f05.py", "f06.py", "f07.py", "f10.py", "f11.py"]
        );

        let ctx = assemble_context(&input, ContextCaps { max_snippets: 100, max_total_lines: 7 });
        assert_eq!(ctx.total_lines, 6);
        assert_eq!(ctx.snippets.iter().map(|s| s.file.as_str()).collect::<Vec<_>>(), ["f10.py", "f11.py"]);
    }

    #[test]
    fn reassembly_is_stable() {
        let input = vec![window("b.py", 5, 9), window("a.py", 30, 40), window("a.py", 1, 29), window("b.py", 20, 22)];
        let once = assemble_context(&input, ContextCaps::default());
        let twice = assemble_context(&once.snippets, ContextCaps::default());
        assert_eq!(once, twice);
    }
}
