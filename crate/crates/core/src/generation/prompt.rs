use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::RelevantCodeContext;
use crate::lang::LanguageSet;

pub const TEMPLATE_ID: &str = "c3gen-v1";
pub const DEFAULT_MAX_PROMPT_CHARS: usize = 200_000;

pub const DIFF_HEADER: &str = "### Code Diff";
pub const CONTEXT_HEADER: &str = "### Related Code Context";

const SYSTEM_TEXT: &str = "\
You are an experienced software engineer writing git commit messages.
Given a code diff, write a commit message for it.
Start with a one-line summary of at most 50 words in the imperative mood.
If the reason for the change is not obvious from the summary, add a blank line and a short rationale.
Related code context, when provided, shows where the changed code is used; use it to understand the \
change, but describe only what the diff does.
Reply with the commit message only, without code fences or commentary.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Naive,
    C3gen,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Naive => "naive",
            Mode::C3gen => "c3gen",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Mode::Naive),
            "c3gen" => Ok(Mode::C3gen),
            _ => Err(PromptError::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("diff is empty")]
    EmptyDiff,
    #[error("unknown prompt template `{0}`")]
    UnknownTemplate(String),
    #[error("unknown mode `{0}` (expected naive or c3gen)")]
    UnknownMode(String),
    #[error("prompt too large: {chars} characters exceeds the limit of {limit}; tighten the context caps")]
    PromptTooLarge { chars: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub mode: Mode,
    pub system_text: String,
    pub user_text: String,
    pub template_id: String,
    pub estimated_chars: usize,
    /// C3Gen mode found no context and fell back to the naive prompt.
    #[serde(default)]
    pub context_empty: bool,
}

/// Shortest backtick fence that cannot be closed early by `body`.
fn fence_for(body: &str) -> String {
    let mut longest = 0;
    let mut run = 0;
    for c in body.chars() {
        if c == '`' {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    "`".repeat((longest + 1).max(3))
}

fn push_block(out: &mut String, info: &str, body: &str) {
    let fence = fence_for(body);
    out.push_str(&fence);
    out.push_str(info);
    out.push('\n');
    out.push_str(body);
    if !body.ends_with('\n') {
        out.push('\n');
    }
    out.push_str(&fence);
    out.push('\n');
}

fn render_diff(diff: &str) -> String {
    let mut out = format!("{DIFF_HEADER}\n\n");
    push_block(&mut out, "diff", diff);
    out
}

fn render_context(context: &RelevantCodeContext) -> String {
    let languages = LanguageSet::default();
    let mut out = format!("{CONTEXT_HEADER}\n");
    for snippet in &context.snippets {
        out.push_str(&format!(
            "\n#### {} (lines {}-{}, {} of {} `{}`)\n",
            snippet.file,
            snippet.start_line,
            snippet.end_line,
            match snippet.reason {
                crate::context::SnippetReason::Window => "around a use",
                _ => "enclosing a use",
            },
            snippet.for_entity.kind,
            snippet.for_entity.name,
        ));
        let info = languages.detect(&snippet.file).map(|l| l.tag()).unwrap_or("");
        push_block(&mut out, info, &snippet.text);
    }
    out
}

/// Renders the model input.
///
/// Without context, or with an empty one, the user text is the diff section
/// alone; otherwise the context section follows it, so the two modes differ
/// only by that section.
pub fn build_prompt(
    diff: &str,
    context: Option<&RelevantCodeContext>,
    template_id: &str,
    max_chars: usize,
) -> Result<PromptBundle, PromptError> {
    if template_id != TEMPLATE_ID {
        return Err(PromptError::UnknownTemplate(template_id.to_string()));
    }
    if diff.trim().is_empty() {
        return Err(PromptError::EmptyDiff);
    }
    let mut user_text = render_diff(diff);
    let context_empty = context.is_some_and(RelevantCodeContext::is_empty);
    if let Some(context) = context.filter(|c| !c.is_empty()) {
        user_text.push('\n');
        user_text.push_str(&render_context(context));
    }
    let chars = user_text.chars().count();
    if chars > max_chars {
        return Err(PromptError::PromptTooLarge { chars, limit: max_chars });
    }
    Ok(PromptBundle {
        mode: if context.is_some() { Mode::C3gen } else { Mode::Naive },
        system_text: SYSTEM_TEXT.to_string(),
        user_text,
        template_id: template_id.to_string(),
        estimated_chars: chars,
        context_empty,
    })
}

/// The diff as rendered into a bundle, if the bundle follows the template.
pub fn diff_of(bundle: &PromptBundle) -> Option<&str> {
    let rest = bundle.user_text.strip_prefix(DIFF_HEADER)?.strip_prefix("\n\n")?;
    let fence_len = rest.chars().take_while(|&c| c == '`').count();
    let fence = &rest[..fence_len];
    let body = &rest[rest.find('\n')? + 1..];
    let end = body.find(&format!("\n{fence}\n")).map(|i| i + 1).or_else(|| body.strip_prefix(fence).map(|_| 0))?;
    Some(&body[..end])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{CodeSnippet, EntityRef, SnippetReason};
    use crate::csg::DefinitionKind;

    const DIFF: &str = "--- a/m.py\n+++ b/m.py\n@@ -1,1 +1,1 @@\n-x = 1\n+x = 2\n";

    fn snippet(file: &str, start: u32, text: &str) -> CodeSnippet {
        CodeSnippet {
            file: file.into(),
            start_line: start,
            end_line: start + text.lines().count() as u32 - 1,
            text: text.into(),
            reason: SnippetReason::EnclosingFunction,
            for_entity: EntityRef { name: "add".into(), kind: DefinitionKind::Function },
        }
    }

    fn context() -> RelevantCodeContext {
        RelevantCodeContext {
            snippets: vec![snippet("a.py", 3, "def f():\n    add(1)\n"), snippet("b.py", 1, "add(2)\n")],
            total_lines: 3,
            truncated: false,
        }
    }

    #[test]
    fn naive_has_no_context_section() {
        let b = build_prompt(DIFF, None, TEMPLATE_ID, DEFAULT_MAX_PROMPT_CHARS).unwrap();
        assert_eq!(b.mode, Mode::Naive);
        assert!(!b.user_text.contains(CONTEXT_HEADER));
        assert!(b.user_text.starts_with("### Code Diff\n\n```diff\n"));
        assert_eq!(b.estimated_chars, b.user_text.len());
    }

    #[test]
    fn modes_differ_only_by_context_section() {
        let naive = build_prompt(DIFF, None, TEMPLATE_ID, DEFAULT_MAX_PROMPT_CHARS).unwrap();
        let ctx = context();
        let full = build_prompt(DIFF, Some(&ctx), TEMPLATE_ID, DEFAULT_MAX_PROMPT_CHARS).unwrap();
        assert_eq!(full.system_text, naive.system_text);
        let extra = full.user_text.strip_prefix(&naive.user_text).unwrap();
        assert!(extra.starts_with("\n### Related Code Context\n"));
        let headers: Vec<&str> = extra.lines().filter(|l| l.starts_with("#### ")).collect();
        assert_eq!(headers.len(), 2);
        assert!(headers[0].starts_with("#### a.py (lines 3-4") && headers[1].starts_with("#### b.py (lines 1-1"));
        assert_eq!(full, build_prompt(DIFF, Some(&ctx), TEMPLATE_ID, DEFAULT_MAX_PROMPT_CHARS).unwrap());
    }

    #[test]
    fn empty_context_degrades_to_naive_text() {
        let naive = build_prompt(DIFF, None, TEMPLATE_ID, DEFAULT_MAX_PROMPT_CHARS).unwrap();
        let b =
            build_prompt(DIFF, Some(&RelevantCodeContext::default()), TEMPLATE_ID, DEFAULT_MAX_PROMPT_CHARS).unwrap();
        assert_eq!(b.mode, Mode::C3gen);
        assert!(b.context_empty);
        assert_eq!(b.user_text, naive.user_text);
    }

    #[test]
    fn errors() {
        assert_eq!(build_prompt(" \n", None, TEMPLATE_ID, 100), Err(PromptError::EmptyDiff));
        assert!(matches!(build_prompt(DIFF, None, "v0", 100), Err(PromptError::UnknownTemplate(_))));
        let err = build_prompt(DIFF, None, TEMPLATE_ID, 10).unwrap_err();
        assert!(err.to_string().starts_with("prompt too large"));
    }

    #[test]
    fn fences_outgrow_backticks_in_content() {
        assert_eq!(fence_for("plain"), "```");
        assert_eq!(fence_for("a ```` b"), "`````");
        let diff = "--- a/r.md\n+++ b/r.md\n@@ -1,1 +1,1 @@\n-```\n+~~~\n";
        let b = build_prompt(diff, None, TEMPLATE_ID, DEFAULT_MAX_PROMPT_CHARS).unwrap();
        assert!(b.user_text.contains("````diff\n"));
        assert_eq!(diff_of(&b), Some(diff));
    }

    #[test]
    fn diff_round_trips() {
        let b = build_prompt(DIFF, Some(&context()), TEMPLATE_ID, DEFAULT_MAX_PROMPT_CHARS).unwrap();
        assert_eq!(diff_of(&b), Some(DIFF));
        let no_newline = "--- a/x\n+++ b/x\n@@ -1 +1 @@\n-a\n+b";
        let b = build_prompt(no_newline, None, TEMPLATE_ID, DEFAULT_MAX_PROMPT_CHARS).unwrap();
        assert_eq!(diff_of(&b), Some("--- a/x\n+++ b/x\n@@ -1 +1 @@\n-a\n+b\n"));
    }
}
