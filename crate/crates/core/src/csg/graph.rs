use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CsgError, DefinitionIndex, DefinitionKind};
use crate::references::InvocationRecord;

/// Node identifiers: the single source node `S`, classes `C<i>`, functions
/// `F<i>` and diff-augmentation nodes `D<i>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Source,
    Class(usize),
    Function(usize),
    Diff(usize),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Source => f.write_str("S"),
            NodeId::Class(i) => write!(f, "C{i}"),
            NodeId::Function(i) => write!(f, "F{i}"),
            NodeId::Diff(i) => write!(f, "D{i}"),
        }
    }
}

impl FromStr for NodeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "S" {
            return Ok(NodeId::Source);
        }
        let (prefix, n) = s.split_at(s.len().min(1));
        let n: usize = n.parse().map_err(|_| format!("bad node id `{s}`"))?;
        match prefix {
            "C" => Ok(NodeId::Class(n)),
            "F" => Ok(NodeId::Function(n)),
            "D" => Ok(NodeId::Diff(n)),
            _ => Err(format!("bad node id `{s}`")),
        }
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitionNode {
    pub id: NodeId,
    pub name: String,
    pub kind: DefinitionKind,
    pub start_line: u32,
    pub end_line: u32,
    /// Position of the backing record in the file's entity list.
    pub record: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffNode {
    pub id: NodeId,
    pub invocation: InvocationRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
}

/// High-level structure of one source file.
///
/// Classes hang off the source node. Functions hang off their nearest
/// enclosing class, or off the source node when no class encloses them.
/// Diff nodes are added by [`crate::references::augment_csgs`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeStructureGraph {
    pub file: String,
    pub classes: Vec<DefinitionNode>,
    pub functions: Vec<DefinitionNode>,
    pub d_nodes: Vec<DiffNode>,
    pub edges: Vec<Edge>,
}

impl CodeStructureGraph {
    pub fn node(&self, id: NodeId) -> Option<&DefinitionNode> {
        match id {
            NodeId::Class(i) => self.classes.get(i),
            NodeId::Function(i) => self.functions.get(i),
            _ => None,
        }
    }

    pub fn definition_nodes(&self) -> impl Iterator<Item = &DefinitionNode> {
        self.classes.iter().chain(self.functions.iter())
    }

    pub fn definition_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| !matches!(e.to, NodeId::Diff(_)))
    }

    /// D-nodes linked from `id`.
    pub fn diff_nodes_of(&self, id: NodeId) -> impl Iterator<Item = &DiffNode> + '_ {
        self.edges.iter().filter(move |e| e.from == id).filter_map(|e| match e.to {
            NodeId::Diff(i) => self.d_nodes.get(i),
            _ => None,
        })
    }

    pub(crate) fn attach(&mut self, owner: NodeId, invocation: InvocationRecord) {
        let id = NodeId::Diff(self.d_nodes.len());
        self.d_nodes.push(DiffNode { id, invocation });
        self.edges.push(Edge { from: owner, to: id });
    }
}

pub fn build_csg(index: &DefinitionIndex, file: &str) -> Result<CodeStructureGraph, CsgError> {
    let defs = index.get(file).ok_or_else(|| CsgError::NotIndexed(file.to_string()))?;
    let parents = defs.parent_indices();

    let mut node_of_record: Vec<NodeId> = Vec::with_capacity(defs.entities.len());
    let mut classes = Vec::new();
    let mut functions = Vec::new();
    for (record, def) in defs.entities.iter().enumerate() {
        let id = match def.kind {
            DefinitionKind::Class => NodeId::Class(classes.len()),
            DefinitionKind::Function => NodeId::Function(functions.len()),
        };
        let node = DefinitionNode {
            id,
            name: def.name.clone(),
            kind: def.kind,
            start_line: def.start_line,
            end_line: def.end_line,
            record,
        };
        match def.kind {
            DefinitionKind::Class => classes.push(node),
            DefinitionKind::Function => functions.push(node),
        }
        node_of_record.push(id);
    }

    let mut edges = Vec::with_capacity(defs.entities.len());
    for (record, def) in defs.entities.iter().enumerate() {
        let from = match def.kind {
            DefinitionKind::Class => NodeId::Source,
            DefinitionKind::Function => {
                let mut ancestor = parents[record];
                loop {
                    match ancestor {
                        Some(a) if defs.entities[a].kind == DefinitionKind::Class => break node_of_record[a],
                        Some(a) => ancestor = parents[a],
                        None => break NodeId::Source,
                    }
                }
            }
        };
        edges.push(Edge { from, to: node_of_record[record] });
    }

    Ok(CodeStructureGraph { file: file.to_string(), classes, functions, d_nodes: Vec::new(), edges })
}

/// One graph per indexed file.
pub fn build_csgs(index: &DefinitionIndex) -> BTreeMap<String, CodeStructureGraph> {
    index.files().map(|f| (f.file.clone(), build_csg(index, &f.file).expect("file comes from the index"))).collect()
}
