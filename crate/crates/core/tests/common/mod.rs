#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;

pub const REPOS: [&str; 4] = ["calc_py", "shapes_java", "webapp_js", "geometry_cpp"];

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn repo(name: &str) -> PathBuf {
    fixtures().join("repos").join(name)
}

pub fn diff_text(repo: &str, diff: &str) -> String {
    std::fs::read_to_string(fixtures().join("diffs").join(repo).join(format!("{diff}.patch"))).unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
pub struct ExpectedDefinition {
    pub name: String,
    pub kind: String,
    pub start_line: u32,
    pub end_line: u32,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
pub struct ExpectedEntity {
    pub name: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
pub struct ExpectedSite {
    pub file: String,
    pub line: u32,
    pub name: String,
    pub kind: String,
    pub reference_kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
pub struct ExpectedSnippet {
    pub file: String,
    pub start_line: u32,
    pub end_line: u32,
    pub reason: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExpectedDiff {
    pub entities: Vec<ExpectedEntity>,
    pub sites: Vec<ExpectedSite>,
    pub snippets: Vec<ExpectedSnippet>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Expected {
    pub definitions: BTreeMap<String, Vec<ExpectedDefinition>>,
    pub diffs: BTreeMap<String, ExpectedDiff>,
}

pub fn expected(repo: &str) -> Expected {
    let text = std::fs::read_to_string(fixtures().join("expected").join(format!("{repo}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}
