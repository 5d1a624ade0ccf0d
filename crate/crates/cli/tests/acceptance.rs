//! Acceptance checks: one PASS/FAIL/SKIP line per criterion.
//!
//! AC8 talks to a real chat-completion endpoint and only runs when
//! `C3GEN_LIVE_ENDPOINT` is set (`C3GEN_LIVE_MODEL` optional, bearer token
//! from `C3GEN_API_KEY`).

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use c3gen_core::context::{extract_snippet, SnippetReason};
use c3gen_core::corpus::{apply_filters, filter_corpus, CommitRecord, FilterConfig, FilterCriterion};
use c3gen_core::csg::{build_definition_index, parse_definitions, IndexOptions};
use c3gen_core::generation::{build_prompt, generate_message, BackendConfig, HttpBackend, TEMPLATE_ID};
use c3gen_core::metrics::{cider, evaluate_run, gleu, meteor, rouge_l, CiderItem, RunResult, TokenizedText};
use c3gen_core::pipeline::{retrieve, RetrievalOptions};
use c3gen_core::references::{scan_references, InvocationRecord, ReferenceKind, ScanOptions};
use c3gen_core::{canonical, DefinitionKind, LanguageSet};

use common::*;

/// sha256 of `generate --mode c3gen --backend mock` stdout on calc_py/add_and_mul.
/// The mock request id hashes the prompt, so this also pins the context.
const PINNED_GENERATE_DIGEST: &str = "239858c0c2bb83c1b764feb1338e01619ca225cd545a5b2506dae4069c4237c7";

enum Outcome {
    Pass(String),
    Skip(String),
}

type Check = Result<Outcome, String>;

/// Id, title, runtime limit in seconds, check.
type Criterion = (&'static str, &'static str, Option<u64>, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    panic::set_hook(Box::new(|_| {}));
    let criteria: [Criterion; 8] = [
        ("AC1", "definition index matches hand-written manifests", Some(5), ac1),
        ("AC2", "reference scan matches planted sites, within grep oracle", Some(5), ac2),
        ("AC3", "snippet geometry at random positions", Some(5), ac3),
        ("AC4", "context is deterministic, merged and sorted", None, ac4),
        ("AC5", "metrics agree with brute-force oracles", Some(30), ac5),
        ("AC6", "corpus filter boundaries and planted corpus", Some(5), ac6),
        ("AC7", "mock generation is digest-stable; modes differ only by context", Some(5), ac7),
        ("AC8", "live endpoint smoke test", None, ac8),
    ];
    let mut failures = 0;
    for (id, title, limit, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(Outcome::Pass(_)), Some(secs)) if elapsed > Duration::from_secs(secs) => {
                Err(format!("took {:.2}s, limit {secs}s", elapsed.as_secs_f64()))
            }
            (o, _) => o,
        };
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(Outcome::Pass(detail)) => println!("{id} PASS {title} [{secs:.2}s] {detail}"),
            Ok(Outcome::Skip(why)) => println!("{id} SKIP {title}: {why}"),
            Err(why) => {
                failures += 1;
                println!("{id} FAIL {title} [{secs:.2}s]: {why}");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}

fn retrieval_options() -> RetrievalOptions {
    RetrievalOptions { persist_index: false, ..RetrievalOptions::default() }
}

fn lines_of(text: &str) -> Vec<&str> {
    text.split_inclusive('\n').collect()
}

fn source_files(root: &Path) -> Vec<String> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.file_name().unwrap().to_string_lossy().starts_with('.') {
                continue;
            }
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                if LanguageSet::default().detect(&rel).is_some() {
                    out.push(rel);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}

// ---------------------------------------------------------------- AC1

fn ac1() -> Check {
    let mut checked = 0;
    for name in REPOS {
        let root = repo(name);
        let expected = expected(name);
        for (file, want) in &expected.definitions {
            let language = LanguageSet::default().detect(file).ok_or_else(|| format!("{file}: no language"))?;
            let source = fs::read_to_string(root.join(file)).map_err(|e| format!("{file}: {e}"))?;
            let got = parse_definitions(&source, language);
            ensure!(got == parse_definitions(&source, language), "{name}/{file}: parse is not deterministic");

            let mut got_rows: Vec<ExpectedDefinition> = got
                .iter()
                .map(|d| ExpectedDefinition {
                    name: d.name.clone(),
                    kind: d.kind.to_string(),
                    start_line: d.start_line,
                    end_line: d.end_line,
                    parent: d.parent.clone(),
                })
                .collect();
            got_rows.sort();
            let mut want = want.clone();
            want.sort();
            ensure!(got_rows == want, "{name}/{file}: got {got_rows:?}, want {want:?}");

            for w in got.windows(2) {
                ensure!(w[0].start_line <= w[1].start_line, "{name}/{file}: not in document order");
            }
            for a in &got {
                ensure!(a.start_line <= a.end_line, "{name}/{file}: inverted span for {}", a.name);
                for b in &got {
                    let overlap = a.start_line <= b.end_line && b.start_line <= a.end_line;
                    ensure!(
                        !overlap || a.contains_span(b) || b.contains_span(a),
                        "{name}/{file}: {} and {} partially overlap",
                        a.name,
                        b.name
                    );
                }
                if let Some(parent) = &a.parent {
                    let enclosed = got.iter().any(|p| &p.name == parent && p != a && p.contains_span(a));
                    ensure!(enclosed, "{name}/{file}: {} is not inside its parent {parent}", a.name);
                }
            }
            checked += got.len();
        }

        let first = build_definition_index(&root, &IndexOptions::default()).map_err(|e| e.to_string())?;
        let second = build_definition_index(&root, &IndexOptions::default()).map_err(|e| e.to_string())?;
        ensure!(first.index.documents() == second.index.documents(), "{name}: index documents differ between builds");
        ensure!(first.index.tree_digest() == second.index.tree_digest(), "{name}: tree digest differs between builds");
        for f in first.index.files().filter(|f| !f.entities.is_empty()) {
            ensure!(expected.definitions.contains_key(&f.file), "{name}: {} has no manifest", f.file);
        }
    }
    Ok(Outcome::Pass(format!("{checked} definitions in 4 repos")))
}

// ---------------------------------------------------------------- AC2

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Every (file, line) where `word` occurs as a whole token, comments and
/// strings included.
fn grep_lines(root: &Path, files: &[String], word: &str) -> BTreeSet<(String, u32)> {
    let mut hits = BTreeSet::new();
    for file in files {
        let text = fs::read_to_string(root.join(file)).unwrap();
        for (i, line) in text.lines().enumerate() {
            let found = line.match_indices(word).any(|(at, _)| {
                let before = line[..at].chars().next_back();
                let after = line[at + word.len()..].chars().next();
                !before.is_some_and(is_token_char) && !after.is_some_and(is_token_char)
            });
            if found {
                hits.insert((file.clone(), i as u32 + 1));
            }
        }
    }
    hits
}

fn ac2() -> Check {
    let (mut diffs, mut sites, mut decoys) = (0, 0, 0);
    for name in REPOS {
        let root = repo(name);
        let files = source_files(&root);
        for (diff_name, want) in expected(name).diffs {
            let label = format!("{name}/{diff_name}");
            let r = retrieve(&root, &diff_text(name, &diff_name), &retrieval_options())
                .map_err(|e| format!("{label}: {e}"))?;
            let scan =
                scan_references(&root, &r.entities, &ScanOptions::default()).map_err(|e| format!("{label}: {e}"))?;

            let mut oracle = BTreeSet::new();
            for e in &r.entities {
                oracle.extend(grep_lines(&root, &files, &e.name));
            }
            for rec in &scan.records {
                ensure!(
                    oracle.contains(&(rec.caller_file.clone(), rec.line)),
                    "{label}: {}:{} is not a grep hit",
                    rec.caller_file,
                    rec.line
                );
            }

            let mut got: Vec<ExpectedSite> = scan
                .records
                .iter()
                .map(|rec| ExpectedSite {
                    file: rec.caller_file.clone(),
                    line: rec.line,
                    name: rec.entity_name.clone(),
                    kind: rec.entity_kind.to_string(),
                    reference_kind: match rec.reference_kind {
                        ReferenceKind::Call => "call".into(),
                        ReferenceKind::Instantiation => "instantiation".into(),
                    },
                })
                .collect();
            got.sort();
            let mut want_sites = want.sites.clone();
            want_sites.sort();
            ensure!(got == want_sites, "{label}: got {got:?}, want {want_sites:?}");

            let site_lines: BTreeSet<(String, u32)> = got.iter().map(|s| (s.file.clone(), s.line)).collect();
            decoys += oracle.difference(&site_lines).count();
            sites += got.len();
            diffs += 1;
        }
    }
    Ok(Outcome::Pass(format!("{diffs} diffs, {sites} sites, {decoys} grep-only lines rejected")))
}

// ---------------------------------------------------------------- AC3

/// Innermost hand-declared definition containing `line`, else the clamped window.
fn oracle_span(defs: &[ExpectedDefinition], line: u32, line_count: u32) -> (u32, u32, SnippetReason) {
    let innermost = defs
        .iter()
        .filter(|d| d.start_line <= line && line <= d.end_line)
        .min_by_key(|d| (d.end_line - d.start_line, u32::MAX - d.start_line));
    match innermost {
        Some(d) if d.kind == "class" => (d.start_line, d.end_line, SnippetReason::EnclosingClass),
        Some(d) => (d.start_line, d.end_line, SnippetReason::EnclosingFunction),
        None => (line.saturating_sub(25).max(1), (line + 25).min(line_count), SnippetReason::Window),
    }
}

fn ac3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let (mut positions, mut full_windows, mut enclosing) = (0, 0, 0);
    for name in REPOS {
        let root = repo(name);
        let index = build_definition_index(&root, &IndexOptions::default()).map_err(|e| e.to_string())?.index;
        for (file, defs) in expected(name).definitions {
            let text = fs::read_to_string(root.join(&file)).unwrap();
            let lines = lines_of(&text);
            let n = lines.len() as u32;
            if n == 0 {
                continue;
            }
            for _ in 0..100 {
                let line = rng.random_range(1..=n);
                let record = InvocationRecord {
                    caller_file: file.clone(),
                    line,
                    entity_name: "target".into(),
                    entity_kind: DefinitionKind::Function,
                    reference_kind: ReferenceKind::Call,
                };
                let s = extract_snippet(&record, &index, &root).map_err(|e| format!("{file}:{line}: {e}"))?;
                let (start, end, reason) = oracle_span(&defs, line, n);
                ensure!(
                    (s.start_line, s.end_line, s.reason) == (start, end, reason),
                    "{name}/{file}:{line}: got {}-{} {:?}, want {start}-{end} {reason:?}",
                    s.start_line,
                    s.end_line,
                    s.reason
                );
                let verbatim: String = lines[start as usize - 1..end as usize].concat();
                ensure!(s.text == verbatim, "{name}/{file}:{line}: text is not verbatim");
                if reason == SnippetReason::Window {
                    ensure!(end - start < 51, "{name}/{file}:{line}: window longer than 51 lines");
                    if line > 25 && line + 25 <= n {
                        ensure!(end - start + 1 == 51, "{name}/{file}:{line}: unclamped window is not 51 lines");
                        full_windows += 1;
                    }
                } else {
                    enclosing += 1;
                }
                positions += 1;
            }
        }
    }
    ensure!(full_windows > 0, "no position produced an unclamped window");
    Ok(Outcome::Pass(format!("{positions} positions, {enclosing} enclosing, {full_windows} full 51-line windows")))
}

// ---------------------------------------------------------------- AC4

fn c3gen_bin() -> &'static str {
    env!("CARGO_BIN_EXE_c3gen")
}

fn ac4() -> Check {
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut pairs = 0;
    for name in REPOS {
        let root = repo(name);
        for diff_name in expected(name).diffs.keys() {
            let label = format!("{name}/{diff_name}");
            let text = diff_text(name, diff_name);
            let a = retrieve(&root, &text, &retrieval_options()).map_err(|e| format!("{label}: {e}"))?;
            let b = retrieve(&root, &text, &retrieval_options()).map_err(|e| format!("{label}: {e}"))?;
            let (ja, jb) = (canonical::to_string(&a.context).unwrap(), canonical::to_string(&b.context).unwrap());
            ensure!(ja == jb, "{label}: library context differs between runs");

            let snippets = &a.context.snippets;
            for w in snippets.windows(2) {
                let (x, y) = (&w[0], &w[1]);
                ensure!((&x.file, x.start_line) < (&y.file, y.start_line), "{label}: snippets out of order");
                if x.file == y.file {
                    ensure!(
                        x.end_line + 1 < y.start_line,
                        "{label}: {} {}-{} and {}-{} not merged",
                        x.file,
                        x.start_line,
                        x.end_line,
                        y.start_line,
                        y.end_line
                    );
                }
            }

            // The same through the binary, cold cache then warm cache.
            let index_dir = scratch.path().join(format!("{name}-{diff_name}"));
            let run = || {
                Command::new(c3gen_bin())
                    .args(["retrieve", "--repo"])
                    .arg(&root)
                    .arg("--diff")
                    .arg(fixtures().join("diffs").join(name).join(format!("{diff_name}.patch")))
                    .arg("--index-dir")
                    .arg(&index_dir)
                    .arg("--manifest")
                    .arg(scratch.path().join("manifest.json"))
                    .output()
                    .unwrap()
            };
            let (first, second) = (run(), run());
            ensure!(first.status.success(), "{label}: retrieve failed: {}", String::from_utf8_lossy(&first.stderr));
            ensure!(first.stdout == second.stdout, "{label}: CLI context differs between runs");
            pairs += 1;
        }
    }
    Ok(Outcome::Pass(format!("{pairs} (diff, repo) pairs")))
}

// ---------------------------------------------------------------- AC5

fn text(tokens: &[&str]) -> TokenizedText {
    TokenizedText { tokens: tokens.iter().map(|t| t.to_string()).collect() }
}

/// Pooled n-gram matches counted by scanning lists, no maps.
fn naive_gleu(c: &[&str], r: &[&str]) -> f64 {
    let grams = |t: &[&str], n: usize| -> Vec<Vec<String>> {
        if t.len() < n {
            return Vec::new();
        }
        (0..=t.len() - n).map(|i| t[i..i + n].iter().map(|s| s.to_string()).collect()).collect()
    };
    let (mut matches, mut ct, mut rt) = (0usize, 0usize, 0usize);
    for n in 1..=4 {
        let (cg, rg) = (grams(c, n), grams(r, n));
        ct += cg.len();
        rt += rg.len();
        let mut seen: Vec<&Vec<String>> = Vec::new();
        for g in &cg {
            if seen.contains(&g) {
                continue;
            }
            seen.push(g);
            let in_c = cg.iter().filter(|x| *x == g).count();
            let in_r = rg.iter().filter(|x| *x == g).count();
            matches += in_c.min(in_r);
        }
    }
    if ct == 0 || rt == 0 {
        return 0.0;
    }
    (matches as f64 / ct as f64).min(matches as f64 / rt as f64)
}

fn is_subsequence(needle: &[&str], hay: &[&str]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// Longest common subsequence by trying every subsequence of `c`.
fn brute_lcs(c: &[&str], r: &[&str]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << c.len()) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let sub: Vec<&str> = (0..c.len()).filter(|i| mask & (1 << i) != 0).map(|i| c[i]).collect();
        if is_subsequence(&sub, r) {
            best = len;
        }
    }
    best
}

fn brute_rouge_f(c: &[&str], r: &[&str]) -> f64 {
    let lcs = brute_lcs(c, r);
    if lcs == 0 {
        return 0.0;
    }
    let (p, rec) = (lcs as f64 / c.len() as f64, lcs as f64 / r.len() as f64);
    2.0 * p * rec / (p + rec)
}

/// CIDEr by definition: per n, TF-IDF vectors as lists of (gram, weight),
/// df over each item's reference set; n-grams absent from every reference
/// set take df = 1.
fn brute_cider(items: &[(Vec<String>, Vec<Vec<String>>)]) -> Vec<f64> {
    let big_n = items.len() as f64;
    let grams = |t: &[String], n: usize| -> Vec<Vec<String>> {
        if t.len() < n {
            return Vec::new();
        }
        (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
    };
    let df = |g: &Vec<String>, n: usize| -> f64 {
        let d = items.iter().filter(|(_, refs)| refs.iter().any(|r| grams(r, n).contains(g))).count();
        d.max(1) as f64
    };
    let vector = |t: &[String], n: usize| -> Vec<(Vec<String>, f64)> {
        let all = grams(t, n);
        let mut out: Vec<(Vec<String>, f64)> = Vec::new();
        for g in &all {
            if out.iter().any(|(x, _)| x == g) {
                continue;
            }
            let tf = all.iter().filter(|x| *x == g).count() as f64;
            out.push((g.clone(), tf * (big_n / df(g, n)).ln()));
        }
        out
    };
    let cos = |a: &[(Vec<String>, f64)], b: &[(Vec<String>, f64)]| -> f64 {
        let na = a.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        let nb = b.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        let dot: f64 = a.iter().map(|(g, w)| w * b.iter().find(|(h, _)| h == g).map_or(0.0, |(_, v)| *v)).sum();
        dot / (na * nb)
    };
    items
        .iter()
        .map(|(cand, refs)| {
            let mut total = 0.0;
            for n in 1..=4 {
                let cv = vector(cand, n);
                total += refs.iter().map(|r| cos(&cv, &vector(r, n))).sum::<f64>() / refs.len() as f64;
            }
            total / 4.0 * 10.0
        })
        .collect()
}

fn ac5() -> Check {
    const VOCAB: [&str; 5] = ["a", "b", "c", "d", "e"];
    let mut short: Vec<Vec<&str>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<&str>> = vec![Vec::new()];
    for _ in 0..3 {
        frontier = frontier.iter().flat_map(|s| VOCAB.iter().map(move |v| [s.as_slice(), &[*v]].concat())).collect();
        short.extend(frontier.iter().cloned());
    }
    let mut pairs: Vec<(Vec<&str>, Vec<&str>)> = Vec::new();
    for c in &short {
        for r in &short {
            pairs.push((c.clone(), r.clone()));
        }
    }
    let exhaustive = pairs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random_seq = |rng: &mut ChaCha8Rng| -> Vec<&str> {
        let len = rng.random_range(0..=8usize);
        (0..len).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect()
    };
    for _ in 0..20_000 {
        let c = random_seq(&mut rng);
        let r = random_seq(&mut rng);
        pairs.push((c, r));
    }
    // Every length pair up to 8 at least once.
    for lc in 0..=8 {
        for lr in 0..=8 {
            let c: Vec<&str> = (0..lc).map(|_| VOCAB[rng.random_range(0..5)]).collect();
            let r: Vec<&str> = (0..lr).map(|_| VOCAB[rng.random_range(0..5)]).collect();
            pairs.push((c, r));
        }
    }
    for (c, r) in &pairs {
        let (tc, tr) = (text(c), text(r));
        let g = gleu(&tc, &tr, 4);
        let want = naive_gleu(c, r);
        ensure!((g - want).abs() <= 1e-12, "gleu({c:?}, {r:?}) = {g}, oracle {want}");
        let f = rouge_l(&tc, &tr).f;
        let want = brute_rouge_f(c, r);
        ensure!((f - want).abs() <= 1e-12, "rouge_l({c:?}, {r:?}).f = {f}, oracle {want}");
    }

    for m in 1..=10u32 {
        let words: Vec<String> = (0..m).map(|i| format!("word{i}")).collect();
        let t = TokenizedText { tokens: words };
        let got = meteor(&t, &t);
        let want = 1.0 - 0.5 / f64::from(m).powi(3);
        ensure!((got - want).abs() <= 1e-9, "meteor identity m={m}: {got}, want {want}");
    }

    for single in [("fix parser", "fix parser"), ("add docs", "remove tests"), ("a b c d e", "a b c")] {
        let s = cider(&[CiderItem { candidate: single.0.into(), references: vec![single.1.into()] }])
            .map_err(|e| e.to_string())?;
        ensure!(s.per_item == [0.0] && s.mean == 0.0, "single-item cider {single:?} = {:?}", s.per_item);
    }

    #[derive(serde::Deserialize)]
    struct FixtureItem {
        candidate: String,
        references: Vec<String>,
    }
    let raw = fs::read_to_string(fixtures().join("metrics/cider_two_items.json")).map_err(|e| e.to_string())?;
    let fixture: Vec<FixtureItem> = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
    let items: Vec<CiderItem> = fixture
        .iter()
        .map(|f| CiderItem {
            candidate: f.candidate.as_str().into(),
            references: f.references.iter().map(|r| r.as_str().into()).collect(),
        })
        .collect();
    let brute_items: Vec<(Vec<String>, Vec<Vec<String>>)> = items
        .iter()
        .map(|i| (i.candidate.tokens.clone(), i.references.iter().map(|r| r.tokens.clone()).collect()))
        .collect();
    let got = cider(&items).map_err(|e| e.to_string())?;
    let want = brute_cider(&brute_items);
    for (g, w) in got.per_item.iter().zip(&want) {
        ensure!((g - w).abs() <= 1e-9, "cider fixture: got {:?}, oracle {want:?}", got.per_item);
    }
    ensure!(want.iter().all(|w| *w > 0.0), "cider fixture oracle is degenerate: {want:?}");

    Ok(Outcome::Pass(format!(
        "{} gleu/rouge pairs ({exhaustive} exhaustive up to length 3), cider fixture {:.6}/{:.6}",
        pairs.len(),
        want[0],
        want[1]
    )))
}

// ---------------------------------------------------------------- AC6

fn sha_for(i: usize) -> String {
    hex::encode(Sha256::digest(i.to_le_bytes()))[..40].to_string()
}

fn additions(file: &str, lines: usize, tag: usize) -> String {
    let mut d = format!("--- a/{file}\n+++ b/{file}\n@@ -0,0 +1,{lines} @@\n");
    for i in 0..lines {
        d.push_str(&format!("+value_{tag}_{i} = {i}\n"));
    }
    d
}

fn words(n: usize, tag: usize) -> String {
    const W: [&str; 8] = ["update", "parser", "handle", "empty", "input", "cache", "lookup", "table"];
    let mut out: Vec<String> = (0..n).map(|i| W[i % W.len()].to_string()).collect();
    if n > 0 {
        out[n - 1] = format!("item{tag}");
    }
    out.join(" ")
}

fn commit(i: usize, author: &str, message: String, file: &str, loc: usize) -> CommitRecord {
    let diff = additions(file, loc, i);
    CommitRecord {
        git_url: "https://example.org/acme/widgets.git".into(),
        repo_full_name: "acme/widgets".into(),
        sha: sha_for(i),
        author: author.into(),
        message,
        diff,
        changed_files: vec![file.into()],
        timestamp: "2022-01-02T03:04:05Z".into(),
        loc_changed: loc,
    }
}

#[derive(Clone, Copy)]
enum Defect {
    Short,
    Long,
    Large,
    NotCode,
    Bot,
    MergeRevert,
}

/// A record with exactly the given defects, and the criteria they trip.
fn planted(i: usize, defects: &[Defect], rng: &mut ChaCha8Rng) -> (CommitRecord, BTreeSet<FilterCriterion>) {
    let mut n_words = rng.random_range(5..=50usize);
    let mut author = "Dana Example";
    let mut file = format!("src/mod_{i}.py");
    let mut loc = rng.random_range(1..=300usize);
    let mut keyword = None;
    let mut failed = BTreeSet::new();
    for d in defects {
        match d {
            Defect::Short => {
                n_words = rng.random_range(1..=4);
                failed.insert(FilterCriterion::MessageLength);
            }
            Defect::Long => {
                n_words = rng.random_range(51..=80);
                failed.insert(FilterCriterion::MessageLength);
            }
            Defect::Large => {
                loc = rng.random_range(301..=400);
                failed.insert(FilterCriterion::DiffSize);
            }
            Defect::NotCode => {
                file = ["README.md", "docs/guide.txt", "config/app.yaml"][i % 3].to_string();
                failed.insert(FilterCriterion::FileType);
            }
            Defect::Bot => {
                author = "dependabot[bot]";
                failed.insert(FilterCriterion::BotAuthor);
            }
            Defect::MergeRevert => {
                keyword = Some(["Merge", "REVERT", "reverted", "merged", "unmerge"][i % 5]);
                failed.insert(FilterCriterion::RevertOrMerge);
            }
        }
    }
    let mut message = words(n_words, i);
    if let Some(k) = keyword {
        let mut ws: Vec<&str> = message.split(' ').collect();
        ws[0] = k;
        message = ws.join(" ");
    }
    (commit(i, author, message, &file, loc), failed)
}

fn ac6() -> Check {
    let cfg = FilterConfig::default();
    let base = |message: String, loc: usize| commit(9_000, "Dana Example", message, "src/app.py", loc);
    for (n, ok) in [(4, false), (5, true), (50, true), (51, false)] {
        ensure!(
            apply_filters(&base(words(n, 1), 10), &cfg).accepted == ok,
            "{n}-word message: accepted should be {ok}"
        );
    }
    for (loc, ok) in [(300, true), (301, false)] {
        let d = apply_filters(&base(words(8, 1), loc), &cfg);
        ensure!(d.accepted == ok, "{loc} changed lines: accepted should be {ok}");
    }
    let mut bot = base(words(8, 1), 10);
    bot.author = "renovate[bot]".into();
    ensure!(apply_filters(&bot, &cfg).failed_criteria == [FilterCriterion::BotAuthor], "bot author not rejected");
    for m in [
        "Merge pull request 12 from acme/topic",
        "Revert \"add cache lookup table\"",
        "this reverts an earlier cache change",
    ] {
        ensure!(!apply_filters(&base(m.into(), 10), &cfg).accepted, "`{m}` not rejected");
    }

    // 1,000 records: 550 clean, 40 duplicates of clean ones, 310 single-defect, 100 multi-defect.
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut rows: Vec<(CommitRecord, BTreeSet<FilterCriterion>)> = Vec::new();
    let mut id = 0;
    let mut next = || {
        id += 1;
        id
    };
    for _ in 0..550 {
        rows.push(planted(next(), &[], &mut rng));
    }
    let singles = [
        (Defect::Short, 60),
        (Defect::Long, 50),
        (Defect::Large, 50),
        (Defect::NotCode, 40),
        (Defect::Bot, 50),
        (Defect::MergeRevert, 60),
    ];
    for (defect, count) in singles {
        for _ in 0..count {
            rows.push(planted(next(), &[defect], &mut rng));
        }
    }
    let all = [Defect::Short, Defect::Large, Defect::NotCode, Defect::Bot, Defect::MergeRevert, Defect::Long];
    for _ in 0..100 {
        let mut pick = all.to_vec();
        pick.shuffle(&mut rng);
        let k = rng.random_range(2..=3);
        // Short and Long are exclusive; keep whichever comes first.
        let mut chosen: Vec<Defect> = Vec::new();
        for d in pick {
            let length = |d: &Defect| matches!(d, Defect::Short | Defect::Long);
            if chosen.len() < k && !(length(&d) && chosen.iter().any(length)) {
                chosen.push(d);
            }
        }
        rows.push(planted(next(), &chosen, &mut rng));
    }
    rows.shuffle(&mut rng);

    // Duplicates: same diff, message re-cased and re-spaced, placed after the original.
    let clean_positions: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| r.1.is_empty()).map(|(i, _)| i).collect();
    let mut originals: Vec<usize> = clean_positions.sample(&mut rng, 40).copied().collect();
    originals.sort_unstable_by(|a, b| b.cmp(a));
    for pos in originals {
        let mut dup = rows[pos].0.clone();
        dup.sha = sha_for(next());
        dup.message = format!("  {}\n", dup.message.to_uppercase().replace(' ', "  "));
        let at = rng.random_range(pos + 1..=rows.len());
        rows.insert(at, (dup, BTreeSet::from([FilterCriterion::Duplicate])));
    }
    ensure!(rows.len() == 1000, "generator produced {} records", rows.len());
    let planted_accepts = rows.iter().filter(|r| r.1.is_empty()).count();
    ensure!(planted_accepts == 550, "generator planted {planted_accepts} accepts");

    let records: Vec<CommitRecord> = rows.iter().map(|r| r.0.clone()).collect();
    for r in &records {
        ensure!(r.check().is_empty(), "generated record {} is malformed: {:?}", r.sha, r.check());
    }
    let outcome = filter_corpus(records, &cfg);
    ensure!(
        outcome.accepted.len() == planted_accepts,
        "accepted {} of 1000, planted {planted_accepts}",
        outcome.accepted.len()
    );
    let mut per_criterion: BTreeMap<FilterCriterion, usize> = BTreeMap::new();
    for (decision, (record, want)) in outcome.decisions.iter().zip(&rows) {
        ensure!(decision.sha == record.sha, "decisions out of order");
        let got: BTreeSet<FilterCriterion> = decision.failed_criteria.iter().copied().collect();
        ensure!(&got == want, "{}: failed {got:?}, planted {want:?}", record.sha);
        ensure!(decision.accepted == got.is_empty(), "{}: accepted flag disagrees with criteria", record.sha);
        for c in got {
            *per_criterion.entry(c).or_default() += 1;
        }
    }
    Ok(Outcome::Pass(format!("550/1000 accepted as planted; rejections {per_criterion:?}")))
}

// ---------------------------------------------------------------- AC7

fn generate(mode: &str, prompt_out: &Path, index_dir: &Path, manifest: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(c3gen_bin())
        .args(["generate", "--backend", "mock", "--mode", mode, "--repo"])
        .arg(repo("calc_py"))
        .arg("--diff")
        .arg(fixtures().join("diffs/calc_py/add_and_mul.patch"))
        .arg("--index-dir")
        .arg(index_dir)
        .arg("--prompt-out")
        .arg(prompt_out)
        .arg("--manifest")
        .arg(manifest)
        .env_remove("C3GEN_CONFIG")
        .env_remove("C3GEN_BACKEND")
        .env_remove("C3GEN_API_KEY")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("generate --mode {mode} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn ac7() -> Check {
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = scratch.path();
    let index_dir = dir.join("index");
    let mut digests = Vec::new();
    for run in 0..3 {
        let stdout = generate("c3gen", &dir.join(format!("c3gen-{run}.json")), &index_dir, &dir.join("m.json"))?;
        digests.push(hex::encode(Sha256::digest(&stdout)));
    }
    ensure!(digests.iter().all(|d| d == &digests[0]), "digests differ across runs: {digests:?}");
    ensure!(
        digests[0] == PINNED_GENERATE_DIGEST,
        "digest {} does not match the pinned {PINNED_GENERATE_DIGEST}",
        digests[0]
    );

    generate("naive", &dir.join("naive.json"), &index_dir, &dir.join("m.json"))?;
    let load = |p: PathBuf| -> Result<serde_json::Value, String> {
        serde_json::from_str(&fs::read_to_string(p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
    };
    let naive = load(dir.join("naive.json"))?;
    let full = load(dir.join("c3gen-0.json"))?;
    ensure!(naive["system_text"] == full["system_text"], "system texts differ");
    ensure!(naive["template_id"] == full["template_id"], "template ids differ");
    let (nu, cu) = (naive["user_text"].as_str().unwrap_or_default(), full["user_text"].as_str().unwrap_or_default());
    let rest = cu.strip_prefix(nu).ok_or("naive prompt is not a prefix of the c3gen prompt")?;
    ensure!(rest.starts_with("\n### Related Code Context\n"), "c3gen prompt adds more than the context section");
    ensure!(
        rest.lines().filter(|l| l.starts_with("### ")).count() == 1,
        "context section contains another top-level section"
    );
    Ok(Outcome::Pass(format!("sha256 {}…, context section {} chars", &digests[0][..12], rest.len())))
}

// ---------------------------------------------------------------- AC8

fn ac8() -> Check {
    let Ok(endpoint) = std::env::var("C3GEN_LIVE_ENDPOINT") else {
        return Ok(Outcome::Skip("set C3GEN_LIVE_ENDPOINT to run".into()));
    };
    let config = BackendConfig {
        endpoint,
        model: std::env::var("C3GEN_LIVE_MODEL").unwrap_or_else(|_| BackendConfig::default().model),
        temperature: 0.0,
        ..BackendConfig::default()
    };
    let backend = HttpBackend::from_env(&config).map_err(|e| e.to_string())?;
    let mut sample: Vec<(String, String)> = Vec::new();
    for name in REPOS {
        for diff_name in expected(name).diffs.keys() {
            sample.push((name.to_string(), diff_name.clone()));
        }
    }
    sample.truncate(10);
    let mut reports = Vec::new();
    for with_context in [false, true] {
        let mut results = Vec::new();
        for (name, diff_name) in &sample {
            let diff = diff_text(name, diff_name);
            let retrieval = retrieve(&repo(name), &diff, &retrieval_options()).map_err(|e| e.to_string())?;
            let context = with_context.then_some(&retrieval.context);
            let bundle = build_prompt(&diff, context, TEMPLATE_ID, 200_000).map_err(|e| e.to_string())?;
            let message =
                generate_message(&bundle, &config, &backend).map_err(|e| format!("{name}/{diff_name}: {e}"))?;
            ensure!(!message.text.trim().is_empty(), "{name}/{diff_name}: empty message");
            results.push(RunResult {
                commit_id: format!("{name}/{diff_name}"),
                generated: message.text,
                reference: Some(diff_name.replace('_', " ")),
            });
        }
        let report = evaluate_run(&results).map_err(|e| e.to_string())?;
        ensure!(report.evaluated == 10 && report.per_item.len() == 10 && report.skipped == 0, "incomplete report");
        reports.push(report.aggregates.bleu);
    }
    Ok(Outcome::Pass(format!("naive BLEU {:.2}, c3gen BLEU {:.2}", reports[0], reports[1])))
}
