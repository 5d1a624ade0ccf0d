//! Maps changed diff lines to the functions and classes they modify.

use std::collections::{BTreeSet, HashMap};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::csg::{DefinitionIndex, DefinitionKind};
use crate::diff::{changed_lines, DiffSegment, Side};
use crate::lang::{Language, LanguageSet};

/// A `(name, kind)` pair touched by a diff, with the files it was seen in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifiedEntity {
    pub name: String,
    pub kind: DefinitionKind,
    pub origin_files: BTreeSet<String>,
}

impl ModifiedEntity {
    pub fn key(&self) -> (&str, DefinitionKind) {
        (&self.name, self.kind)
    }
}

/// Which enclosing definitions a changed line is attributed to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attribution {
    /// Only the innermost definition: a change inside method `m` of `K` yields `m`.
    #[default]
    Innermost,
    /// Every definition on the path from the outermost to the innermost.
    AllEnclosing,
}

impl std::str::FromStr for Attribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "innermost" => Ok(Attribution::Innermost),
            "all-enclosing" => Ok(Attribution::AllEnclosing),
            other => Err(format!("unknown attribution `{other}` (expected innermost or all-enclosing)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EntityOptions {
    pub attribution: Attribution,
    /// Selects the textual fallback patterns for removed lines.
    pub languages: LanguageSet,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityExtraction {
    pub entities: Vec<ModifiedEntity>,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct EntityList {
    entities: Vec<ModifiedEntity>,
    positions: HashMap<(String, DefinitionKind), usize>,
}

impl EntityList {
    fn add(&mut self, name: &str, kind: DefinitionKind, file: &str) {
        let key = (name.to_string(), kind);
        let pos = *self.positions.entry(key).or_insert_with(|| {
            self.entities.push(ModifiedEntity { name: name.to_string(), kind, origin_files: BTreeSet::new() });
            self.entities.len() - 1
        });
        self.entities[pos].origin_files.insert(file.to_string());
    }
}

/// Builds the deduplicated list of modified entities, ordered by first
/// appearance in the diff.
///
/// Added lines resolve against `index_new`. Removed lines resolve against
/// `index_old` when it covers the file; otherwise removed definition headers
/// are recognised textually, so deleting a whole function still names it.
/// Lines outside every definition contribute nothing.
pub fn extract_modified_entities(
    segments: &[DiffSegment],
    index_new: &DefinitionIndex,
    index_old: Option<&DefinitionIndex>,
    options: &EntityOptions,
) -> EntityExtraction {
    let mut list = EntityList::default();
    let mut warnings = Vec::new();

    for segment in segments {
        let new_defs = segment.new_path.as_deref().and_then(|p| index_new.get(p));
        let old_defs = segment.old_path.as_deref().and_then(|p| index_old.and_then(|i| i.get(p)));
        let fallback_language = segment.old_path.as_deref().and_then(|p| options.languages.detect(p));

        let lines = changed_lines(segment);
        if lines.is_empty() {
            continue;
        }
        let path = segment.path().unwrap_or("<unnamed>");
        if new_defs.is_none() && old_defs.is_none() && fallback_language.is_none() {
            warnings.push(format!("{path}: not in any definition index; ignored"));
        } else if new_defs.is_none() && lines.iter().any(|c| c.side == Side::New) {
            warnings.push(format!("{path}: post-change file not indexed; added lines ignored"));
        }

        for changed in lines {
            let (defs, path) = match changed.side {
                Side::New => (new_defs, segment.new_path.as_deref()),
                Side::Old => (old_defs, segment.old_path.as_deref()),
            };
            let Some(path) = path else { continue };
            match defs {
                Some(defs) => {
                    let chain = defs.enclosing_chain(changed.line);
                    let picked: &[usize] = match options.attribution {
                        Attribution::Innermost => chain.last().map(std::slice::from_ref).unwrap_or(&[]),
                        Attribution::AllEnclosing => &chain,
                    };
                    for &i in picked {
                        let record = &defs.entities[i];
                        list.add(&record.name, record.kind, path);
                    }
                }
                None if changed.side == Side::Old => {
                    if let Some((name, kind)) = fallback_language.and_then(|l| removed_definition(changed.text, l)) {
                        list.add(&name, kind, path);
                    }
                }
                None => {}
            }
        }
    }
    EntityExtraction { entities: list.entities, warnings }
}

const KEYWORDS: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "catch",
    "return",
    "new",
    "else",
    "do",
    "try",
    "throw",
    "throws",
    "case",
    "synchronized",
    "super",
    "this",
    "sizeof",
    "delete",
    "goto",
    "await",
    "typeof",
    "yield",
    "function",
    "with",
    "elif",
    "assert",
    "decltype",
    "static_assert",
    "alignof",
    "using",
    "namespace",
];

fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

macro_rules! re {
    ($pattern:expr) => {
        LazyLock::new(|| Regex::new($pattern).expect("static pattern"))
    };
}

static PY_DEF: LazyLock<Regex> = re!(r"^\s*(?:async\s+)?def\s+([A-Za-z_]\w*)");
static PY_CLASS: LazyLock<Regex> = re!(r"^\s*class\s+([A-Za-z_]\w*)");
static JAVA_CLASS: LazyLock<Regex> = re!(r"\b(?:class|interface|enum|record)\s+([A-Za-z_$][\w$]*)");
static JAVA_METHOD: LazyLock<Regex> = re!(r"^\s*((?:[\w$<>\[\],.?@]+\s+)+)([A-Za-z_$][\w$]*)\s*\([^;]*$");
static JS_CLASS: LazyLock<Regex> = re!(r"\bclass\s+([A-Za-z_$][\w$]*)");
static JS_FUNCTION: LazyLock<Regex> = re!(r"\bfunction\s*\*?\s*([A-Za-z_$][\w$]*)\s*\(");
static JS_BOUND: LazyLock<Regex> = re!(
    r"\b(?:const|let|var)\s+([A-Za-z_$][\w$]*)\s*=\s*(?:async\s+)?(?:function\b|\([^)]*\)\s*=>|[A-Za-z_$][\w$]*\s*=>)"
);
static JS_METHOD: LazyLock<Regex> = re!(r"^\s*(?:(?:static|async|get|set)\s+)*\*?([A-Za-z_$][\w$]*)\s*\([^)]*\)\s*\{");
static CPP_CLASS: LazyLock<Regex> = re!(r"^\s*(?:template\s*<[^>]*>\s*)?(?:class|struct)\s+([A-Za-z_]\w*)[^;]*$");
static CPP_FUNCTION: LazyLock<Regex> =
    re!(r"^\s*((?:[\w:<>,*&]+\s+)*)[*&]*((?:[A-Za-z_]\w*::)*~?[A-Za-z_]\w*)\s*\([^;]*$");

/// Recognises a definition header on a removed line.
pub fn removed_definition(line: &str, language: Language) -> Option<(String, DefinitionKind)> {
    use DefinitionKind::{Class, Function};
    let cap = |re: &Regex, group: usize| re.captures(line).map(|c| c[group].to_string());
    match language {
        Language::Python => cap(&PY_CLASS, 1).map(|n| (n, Class)).or_else(|| cap(&PY_DEF, 1).map(|n| (n, Function))),
        Language::Java => {
            if line.trim_start().starts_with("//") || line.trim_start().starts_with('*') {
                return None;
            }
            if let Some(name) = cap(&JAVA_CLASS, 1) {
                return Some((name, Class));
            }
            let c = JAVA_METHOD.captures(line)?;
            let prefix_words: Vec<&str> = c[1].split_whitespace().collect();
            let name = &c[2];
            if is_keyword(name) || prefix_words.iter().any(|w| is_keyword(w) && *w != "synchronized") {
                return None;
            }
            Some((name.to_string(), Function))
        }
        Language::JavaScript => {
            if line.trim_start().starts_with("//") {
                return None;
            }
            if let Some(name) = cap(&JS_CLASS, 1) {
                return Some((name, Class));
            }
            if let Some(name) = cap(&JS_FUNCTION, 1).or_else(|| cap(&JS_BOUND, 1)) {
                return Some((name, Function));
            }
            let name = cap(&JS_METHOD, 1)?;
            (!is_keyword(&name)).then_some((name, Function))
        }
        Language::Cpp => {
            if line.trim_start().starts_with("//") {
                return None;
            }
            if let Some(name) = cap(&CPP_CLASS, 1) {
                return Some((name, Class));
            }
            let c = CPP_FUNCTION.captures(line)?;
            let prefix_words: Vec<&str> = c[1].split_whitespace().collect();
            let qualified = &c[2];
            let name = qualified.rsplit("::").next().unwrap_or(qualified);
            let typed = !prefix_words.is_empty() || qualified.contains("::");
            if !typed || is_keyword(name) || prefix_words.iter().any(|w| is_keyword(w)) {
                return None;
            }
            Some((name.to_string(), Function))
        }
    }
}
