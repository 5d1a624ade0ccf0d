//! Commit-context retrieval and commit-message evaluation.
//!
//! The retrieval pipeline runs in three stages:
//!
//! 1. [`csg`] parses every supported source file into a [`csg::DefinitionIndex`]
//!    and builds one [`csg::CodeStructureGraph`] per file.
//! 2. [`diff`] and [`entities`] turn a unified diff into the list of modified
//!    functions and classes, and [`references`] finds every call or
//!    instantiation of those entities across the repository.
//! 3. [`context`] extracts the code around each reference and merges it into a
//!    [`context::RelevantCodeContext`].
//!
//! [`pipeline`] wires the stages together, [`generation`] renders prompts and
//! talks to a chat-completion backend, [`metrics`] scores generated messages
//! and [`corpus`] builds filtered commit datasets.

pub mod canonical;
pub mod context;
pub mod corpus;
pub mod csg;
pub mod diff;
pub mod entities;
pub mod generation;
pub mod lang;
pub mod metrics;
pub mod pipeline;
pub mod references;
pub(crate) mod syntax;

pub use csg::{DefinitionIndex, DefinitionKind, DefinitionRecord};
pub use lang::{Language, LanguageSet};
