//! Unified diff parsing and line-range queries.
//!
//! Accepts `git diff` / `git show` output (with or without a commit header),
//! including renames, copies, mode changes and binary markers, as well as
//! plain `---`/`+++` diffs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("malformed hunk header at byte {offset}: `{line}`")]
    HunkHeader { offset: usize, line: String },
    #[error("hunk starting at byte {offset} ends early: expected {old_len} old and {new_len} new lines")]
    TruncatedHunk { offset: usize, old_len: u32, new_len: u32 },
    #[error("unexpected line inside hunk at byte {offset}: `{line}`")]
    HunkLine { offset: usize, line: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Context,
    Added,
    Removed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HunkLine {
    pub kind: LineKind,
    /// Line content without the marker and without the line terminator.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: u32,
    pub old_len: u32,
    pub new_start: u32,
    pub new_len: u32,
    pub lines: Vec<HunkLine>,
}

impl Hunk {
    /// Context + removed lines equal `old_len`; context + added equal `new_len`.
    pub fn counts_consistent(&self) -> bool {
        let count = |k: LineKind| self.lines.iter().filter(|l| l.kind == k).count() as u32;
        let (ctx, add, del) = (count(LineKind::Context), count(LineKind::Added), count(LineKind::Removed));
        ctx + del == self.old_len && ctx + add == self.new_len
    }
}

/// The part of a diff that applies to one file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSegment {
    /// `None` for an added file.
    pub old_path: Option<String>,
    /// `None` for a deleted file.
    pub new_path: Option<String>,
    pub hunks: Vec<Hunk>,
    pub binary: bool,
}

impl DiffSegment {
    /// The path the change is best known by: new side, else old side.
    pub fn path(&self) -> Option<&str> {
        self.new_path.as_deref().or(self.old_path.as_deref())
    }

    pub fn path_on(&self, side: Side) -> Option<&str> {
        match side {
            Side::Old => self.old_path.as_deref(),
            Side::New => self.new_path.as_deref(),
        }
    }

    pub fn added_lines(&self) -> usize {
        self.lines_of(LineKind::Added)
    }

    pub fn removed_lines(&self) -> usize {
        self.lines_of(LineKind::Removed)
    }

    fn lines_of(&self, kind: LineKind) -> usize {
        self.hunks.iter().flat_map(|h| &h.lines).filter(|l| l.kind == kind).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Old,
    New,
}

/// Inclusive 1-based line range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LineRange {
    pub start: u32,
    pub end: u32,
}

impl LineRange {
    pub fn lines(self) -> impl Iterator<Item = u32> {
        self.start..=self.end
    }
}

/// A line touched by the diff, in diff order, with its file coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChangedLine<'a> {
    pub side: Side,
    pub line: u32,
    pub text: &'a str,
}

/// Added (new-side) and removed (old-side) lines of a segment, in diff order.
pub fn changed_lines(segment: &DiffSegment) -> Vec<ChangedLine<'_>> {
    let mut out = Vec::new();
    for hunk in &segment.hunks {
        let (mut old, mut new) = (hunk.old_start, hunk.new_start);
        for line in &hunk.lines {
            match line.kind {
                LineKind::Context => {
                    old += 1;
                    new += 1;
                }
                LineKind::Added => {
                    out.push(ChangedLine { side: Side::New, line: new, text: &line.text });
                    new += 1;
                }
                LineKind::Removed => {
                    out.push(ChangedLine { side: Side::Old, line: old, text: &line.text });
                    old += 1;
                }
            }
        }
    }
    out
}

/// Sorted, disjoint ranges of changed lines on one side. Added lines are in
/// new-file coordinates, removed lines in old-file coordinates.
pub fn changed_line_ranges(segment: &DiffSegment, side: Side) -> Vec<LineRange> {
    let mut lines: Vec<u32> = changed_lines(segment).into_iter().filter(|c| c.side == side).map(|c| c.line).collect();
    lines.sort_unstable();
    lines.dedup();
    let mut ranges: Vec<LineRange> = Vec::new();
    for line in lines {
        match ranges.last_mut() {
            Some(r) if r.end + 1 == line => r.end = line,
            _ => ranges.push(LineRange { start: line, end: line }),
        }
    }
    ranges
}

/// Total added + removed lines across all segments.
pub fn changed_line_count(segments: &[DiffSegment]) -> usize {
    segments.iter().map(|s| s.added_lines() + s.removed_lines()).sum()
}

/// Rebuilds the pre-change text of a file from its post-change text by
/// undoing the segment's hunks. `new_text` is `None` for a deleted file.
///
/// Returns `None` when the hunks do not match `new_text`.
pub fn reverse_apply(segment: &DiffSegment, new_text: Option<&str>) -> Option<String> {
    if segment.binary {
        return None;
    }
    let new_text = new_text.unwrap_or("");
    let new_lines: Vec<&str> = new_text.lines().collect();
    let mut out: Vec<&str> = Vec::with_capacity(new_lines.len());
    let mut next = 0usize; // 0-based index of the next unconsumed new line
    for hunk in &segment.hunks {
        // An empty new side anchors after line `new_start`.
        let copy_until = if hunk.new_len == 0 { hunk.new_start } else { hunk.new_start.checked_sub(1)? } as usize;
        if copy_until < next || copy_until > new_lines.len() {
            return None;
        }
        out.extend_from_slice(&new_lines[next..copy_until]);
        next = copy_until;
        for line in &hunk.lines {
            match line.kind {
                LineKind::Context | LineKind::Added => {
                    if new_lines.get(next) != Some(&line.text.as_str()) {
                        return None;
                    }
                    if line.kind == LineKind::Context {
                        out.push(&line.text);
                    }
                    next += 1;
                }
                LineKind::Removed => out.push(&line.text),
            }
        }
    }
    out.extend_from_slice(new_lines.get(next..)?);
    if out.is_empty() {
        return Some(String::new());
    }
    let mut text = out.join("\n");
    text.push('\n');
    Some(text)
}

struct Line<'a> {
    offset: usize,
    text: &'a str,
}

fn split_lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for raw in text.split_inclusive('\n') {
        let body = raw.strip_suffix('\n').unwrap_or(raw);
        let body = body.strip_suffix('\r').unwrap_or(body);
        out.push(Line { offset, text: body });
        offset += raw.len();
    }
    out
}

/// Undoes git's C-style quoting of paths containing special characters.
fn unquote(path: &str) -> String {
    let Some(inner) = path.strip_prefix('"').and_then(|p| p.strip_suffix('"')) else {
        return path.to_string();
    };
    let mut bytes = Vec::with_capacity(inner.len());
    let mut chars = inner.bytes().peekable();
    while let Some(b) = chars.next() {
        if b != b'\\' {
            bytes.push(b);
            continue;
        }
        match chars.next() {
            Some(b'n') => bytes.push(b'\n'),
            Some(b't') => bytes.push(b'\t'),
            Some(b'"') => bytes.push(b'"'),
            Some(b'\\') => bytes.push(b'\\'),
            Some(d @ b'0'..=b'7') => {
                let mut value = u32::from(d - b'0');
                for _ in 0..2 {
                    match chars.peek() {
                        Some(&n @ b'0'..=b'7') => {
                            value = value * 8 + u32::from(n - b'0');
                            chars.next();
                        }
                        _ => break,
                    }
                }
                bytes.push(value as u8);
            }
            Some(other) => bytes.push(other),
            None => bytes.push(b'\\'),
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

/// Path from a `---`/`+++` line: strips `a/`/`b/`, maps `/dev/null` to `None`,
/// and drops a trailing tab-separated timestamp.
fn header_path(raw: &str) -> Option<String> {
    let raw = if raw.starts_with('"') { raw } else { raw.split('\t').next().unwrap_or(raw) };
    let path = unquote(raw.trim_end());
    if path == "/dev/null" {
        return None;
    }
    Some(strip_prefix(&path))
}

fn strip_prefix(path: &str) -> String {
    path.strip_prefix("a/").or_else(|| path.strip_prefix("b/")).unwrap_or(path).to_string()
}

/// `diff --git a/x b/y` → (x, y). Ambiguous for unquoted paths with spaces;
/// the `---`/`+++` or rename headers override it when present.
fn git_header_paths(rest: &str) -> (Option<String>, Option<String>) {
    if let Some(inner) = rest.strip_prefix('"') {
        if let Some(end) = inner.find("\" ").map(|i| i + 1) {
            let (a, b) = (&rest[..=end], rest[end + 1..].trim_start());
            return (Some(strip_prefix(&unquote(a))), Some(strip_prefix(&unquote(b))));
        }
    }
    // Prefer the split where both halves name the same path.
    let candidates: Vec<usize> = rest.match_indices(" b/").map(|(i, _)| i).collect();
    for &i in &candidates {
        let (a, b) = (&rest[..i], &rest[i + 1..]);
        if a.strip_prefix("a/") == b.strip_prefix("b/") {
            return (Some(strip_prefix(a)), Some(strip_prefix(b)));
        }
    }
    match candidates.last() {
        Some(&i) => (Some(strip_prefix(&rest[..i])), Some(strip_prefix(&unquote(&rest[i + 1..])))),
        None => match rest.split_once(' ') {
            Some((a, b)) => (Some(strip_prefix(a)), Some(strip_prefix(b))),
            None => (None, None),
        },
    }
}

/// `@@ -a[,b] +c[,d] @@ ...`
fn parse_hunk_header(line: &str) -> Option<(u32, u32, u32, u32)> {
    let rest = line.strip_prefix("@@ -")?;
    let (ranges, _) = rest.split_once(" @@")?;
    let (old, new) = ranges.split_once(" +")?;
    let range = |s: &str| -> Option<(u32, u32)> {
        match s.split_once(',') {
            Some((start, len)) => Some((start.parse().ok()?, len.parse().ok()?)),
            None => Some((s.parse().ok()?, 1)),
        }
    };
    let (old_start, old_len) = range(old)?;
    let (new_start, new_len) = range(new)?;
    Some((old_start, old_len, new_start, new_len))
}

/// Parses a unified diff into one segment per changed file.
pub fn parse_unified_diff(text: &str) -> Result<Vec<DiffSegment>, DiffError> {
    let lines = split_lines(text);
    let mut segments: Vec<DiffSegment> = Vec::new();
    let mut current: Option<DiffSegment> = None;
    let mut i = 0;

    while i < lines.len() {
        let Line { offset, text: line } = lines[i];

        if let Some(rest) = line.strip_prefix("diff --git ") {
            segments.extend(current.take());
            let (old, new) = git_header_paths(rest);
            current = Some(DiffSegment { old_path: old, new_path: new, ..Default::default() });
            i += 1;
            continue;
        }

        // A `---`/`+++` pair outside a hunk. Starts a new segment for plain
        // diffs, or for a second file when no `diff --git` line precedes it.
        if line.starts_with("--- ") && lines.get(i + 1).is_some_and(|n| n.text.starts_with("+++ ")) {
            let old = header_path(&line[4..]);
            let new = header_path(&lines[i + 1].text[4..]);
            let reuse = current.as_ref().is_some_and(|c| c.hunks.is_empty() && !c.binary);
            if !reuse {
                segments.extend(current.take());
                current = Some(DiffSegment::default());
            }
            let seg = current.as_mut().expect("segment present");
            seg.old_path = old;
            seg.new_path = new;
            i += 2;
            continue;
        }

        if line.starts_with("@@") {
            let (old_start, old_len, new_start, new_len) =
                parse_hunk_header(line).ok_or_else(|| DiffError::HunkHeader { offset, line: line.to_string() })?;
            let seg = current.get_or_insert_with(DiffSegment::default);
            let header_offset = offset;
            i += 1;
            let (mut old_left, mut new_left) = (old_len, new_len);
            let mut body = Vec::new();
            while old_left > 0 || new_left > 0 {
                let Some(next) = lines.get(i) else {
                    return Err(DiffError::TruncatedHunk { offset: header_offset, old_len, new_len });
                };
                let (kind, content) = match next.text.as_bytes().first() {
                    Some(b' ') => (LineKind::Context, &next.text[1..]),
                    // Some tools strip the space of blank context lines.
                    None => (LineKind::Context, ""),
                    Some(b'+') => (LineKind::Added, &next.text[1..]),
                    Some(b'-') => (LineKind::Removed, &next.text[1..]),
                    Some(b'\\') => {
                        i += 1;
                        continue;
                    }
                    _ => {
                        return Err(if next.text.starts_with("diff --git ") || next.text.starts_with("@@") {
                            DiffError::TruncatedHunk { offset: header_offset, old_len, new_len }
                        } else {
                            DiffError::HunkLine { offset: next.offset, line: next.text.to_string() }
                        })
                    }
                };
                let budget = match kind {
                    LineKind::Context => old_left > 0 && new_left > 0,
                    LineKind::Added => new_left > 0,
                    LineKind::Removed => old_left > 0,
                };
                if !budget {
                    return Err(DiffError::HunkLine { offset: next.offset, line: next.text.to_string() });
                }
                match kind {
                    LineKind::Context => {
                        old_left -= 1;
                        new_left -= 1;
                    }
                    LineKind::Added => new_left -= 1,
                    LineKind::Removed => old_left -= 1,
                }
                body.push(HunkLine { kind, text: content.to_string() });
                i += 1;
            }
            // "\ No newline at end of file" after the last line.
            while lines.get(i).is_some_and(|l| l.text.starts_with('\\')) {
                i += 1;
            }
            seg.hunks.push(Hunk { old_start, old_len, new_start, new_len, lines: body });
            continue;
        }

        if let Some(seg) = current.as_mut() {
            if line == "new file mode" || line.starts_with("new file mode ") {
                seg.old_path = None;
            } else if line.starts_with("deleted file mode") {
                seg.new_path = None;
            } else if let Some(p) = line.strip_prefix("rename from ").or_else(|| line.strip_prefix("copy from ")) {
                seg.old_path = Some(unquote(p));
            } else if let Some(p) = line.strip_prefix("rename to ").or_else(|| line.strip_prefix("copy to ")) {
                seg.new_path = Some(unquote(p));
            } else if line.starts_with("Binary files ") || line == "GIT binary patch" {
                seg.binary = true;
            }
        }
        i += 1;
    }
    segments.extend(current);
    Ok(segments)
}
