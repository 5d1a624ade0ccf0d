use std::collections::BTreeSet;

use proptest::prelude::*;

use c3gen_core::context::{assemble_context, CodeSnippet, ContextCaps, EntityRef, SnippetReason};
use c3gen_core::corpus::split;
use c3gen_core::diff::{changed_line_count, parse_unified_diff, reverse_apply};
use c3gen_core::metrics::{gleu, meteor, rouge_l, TokenizedText};
use c3gen_core::DefinitionKind;

fn line_text(file: &str, n: u32) -> String {
    format!("{file}:{n}\n")
}

fn snippet(file: &str, start: u32, len: u32, reason: SnippetReason) -> CodeSnippet {
    let end = start + len - 1;
    CodeSnippet {
        file: file.into(),
        start_line: start,
        end_line: end,
        text: (start..=end).map(|n| line_text(file, n)).collect(),
        reason,
        for_entity: EntityRef { name: "f".into(), kind: DefinitionKind::Function },
    }
}

fn snippets() -> impl Strategy<Value = Vec<CodeSnippet>> {
    let reason = prop_oneof![
        Just(SnippetReason::Window),
        Just(SnippetReason::EnclosingClass),
        Just(SnippetReason::EnclosingFunction)
    ];
    prop::collection::vec((prop_oneof![Just("a.py"), Just("b.py")], 1u32..120, 1u32..40, reason), 0..10)
        .prop_map(|v| v.into_iter().map(|(f, s, l, r)| snippet(f, s, l, r)).collect())
}

fn covered(snippets: &[CodeSnippet]) -> BTreeSet<(String, u32)> {
    snippets.iter().flat_map(|s| (s.start_line..=s.end_line).map(move |n| (s.file.clone(), n))).collect()
}

fn tokens(max: usize) -> impl Strategy<Value = TokenizedText> {
    prop::collection::vec(prop_oneof![Just("fix"), Just("add"), Just("parser"), Just("test"), Just("tests")], 0..max)
        .prop_map(|v| TokenizedText { tokens: v.into_iter().map(String::from).collect() })
}

#[derive(Debug, Clone)]
enum Edit {
    Keep,
    Remove,
    Replace(String),
    InsertBefore(String),
}

fn edits() -> impl Strategy<Value = Vec<(String, Edit)>> {
    let text = "[a-c ]{0,4}";
    let edit = prop_oneof![
        3 => Just(Edit::Keep),
        1 => Just(Edit::Remove),
        1 => text.prop_map(Edit::Replace),
        1 => text.prop_map(Edit::InsertBefore),
    ];
    prop::collection::vec((text, edit), 1..25)
}

/// Old text, new text and a single whole-file hunk between them.
fn render(edits: &[(String, Edit)]) -> (String, String, String) {
    let (mut old, mut new, mut body) = (Vec::new(), Vec::new(), String::new());
    for (line, edit) in edits {
        old.push(line.clone());
        match edit {
            Edit::Keep => {
                new.push(line.clone());
                body += &format!(" {line}\n");
            }
            Edit::Remove => body += &format!("-{line}\n"),
            Edit::Replace(with) => {
                new.push(with.clone());
                body += &format!("-{line}\n+{with}\n");
            }
            Edit::InsertBefore(extra) => {
                new.push(extra.clone());
                new.push(line.clone());
                body += &format!("+{extra}\n {line}\n");
            }
        }
    }
    let start = |n: usize| usize::from(n > 0);
    let header = format!("@@ -{},{} +{},{} @@\n", start(old.len()), old.len(), start(new.len()), new.len());
    let join = |v: &[String]| if v.is_empty() { String::new() } else { v.join("\n") + "\n" };
    (join(&old), join(&new), format!("--- a/f.py\n+++ b/f.py\n{header}{body}"))
}

proptest! {
    #[test]
    fn merged_context_is_sorted_disjoint_and_complete(input in snippets()) {
        let ctx = assemble_context(&input, ContextCaps::default());
        prop_assert!(!ctx.truncated);
        prop_assert_eq!(covered(&ctx.snippets), covered(&input));
        for w in ctx.snippets.windows(2) {
            prop_assert!((&w[0].file, w[0].start_line) < (&w[1].file, w[1].start_line));
            if w[0].file == w[1].file {
                prop_assert!(w[0].end_line + 1 < w[1].start_line);
            }
        }
        for s in &ctx.snippets {
            let text: String = (s.start_line..=s.end_line).map(|n| line_text(&s.file, n)).collect();
            prop_assert_eq!(&s.text, &text);
        }
        prop_assert_eq!(ctx.total_lines, ctx.snippets.iter().map(CodeSnippet::line_count).sum::<usize>());
        prop_assert_eq!(assemble_context(&ctx.snippets, ContextCaps::default()), ctx);
    }

    #[test]
    fn caps_bound_the_context(input in snippets(), max_snippets in 0usize..5, max_total_lines in 0usize..120) {
        let caps = ContextCaps { max_snippets, max_total_lines };
        let ctx = assemble_context(&input, caps);
        prop_assert!(ctx.snippets.len() <= max_snippets);
        prop_assert!(ctx.total_lines <= max_total_lines);
        prop_assert_eq!(ctx.truncated, covered(&ctx.snippets) != covered(&input));
    }

    #[test]
    fn reverse_apply_restores_the_old_side(edits in edits()) {
        let (old, new, diff) = render(&edits);
        let segments = parse_unified_diff(&diff).unwrap();
        prop_assert_eq!(segments.len(), 1);
        prop_assert_eq!(reverse_apply(&segments[0], Some(&new)), Some(old));
        let changed = diff.lines().skip(3).filter(|l| !l.starts_with(' ')).count();
        prop_assert_eq!(changed_line_count(&segments), changed);
    }

    #[test]
    fn metric_ranges_and_identities(c in tokens(9), r in tokens(9)) {
        let g = gleu(&c, &r, 4);
        let rl = rouge_l(&c, &r);
        let m = meteor(&c, &r);
        for v in [g, rl.precision, rl.recall, rl.f, m] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if c.len() == r.len() {
            prop_assert_eq!(rl.f, rouge_l(&r, &c).f);
        }
        if !c.is_empty() {
            prop_assert_eq!(gleu(&c, &c, 4), 1.0);
            prop_assert_eq!(rouge_l(&c, &c).f, 1.0);
        }
    }

    #[test]
    fn split_partitions_deterministically(n in 0usize..200, seed: u64, frac in 0.0f64..=1.0) {
        let ids: Vec<usize> = (0..n).collect();
        let test_size = (n as f64 * frac) as usize;
        let a = split(ids.clone(), seed, test_size).unwrap();
        prop_assert_eq!(&a, &split(ids.clone(), seed, test_size).unwrap());
        prop_assert_eq!(a.test.len(), test_size);
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        prop_assert!(a.train.windows(2).all(|w| w[0] < w[1]) && a.test.windows(2).all(|w| w[0] < w[1]));
        all.sort_unstable();
        prop_assert_eq!(all, ids);
    }
}
