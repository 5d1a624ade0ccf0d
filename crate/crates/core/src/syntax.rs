//! Grammar-level extraction shared by the definition index and the reference scan.

use tree_sitter::{Node, Parser, Tree};

use crate::csg::DefinitionKind;
use crate::lang::Language;

pub(crate) fn parse(source: &str, language: Language) -> Option<Tree> {
    let mut parser = Parser::new();
    parser.set_language(&language.grammar()).ok()?;
    parser.parse(source, None)
}

/// A definition found in a syntax tree. `parent` indexes into the same list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawDefinition {
    pub name: String,
    pub kind: DefinitionKind,
    pub start_line: u32,
    pub end_line: u32,
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SiteKind {
    /// A call expression; the name is the callee (method name for `obj.m()`).
    Call,
    /// `new T(...)`; the name is the constructed type.
    New,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawSite {
    pub name: String,
    pub line: u32,
    pub kind: SiteKind,
}

fn text<'s>(node: Node<'_>, source: &'s str) -> &'s str {
    &source[node.byte_range()]
}

fn line_of(node: Node<'_>) -> u32 {
    node.start_position().row as u32 + 1
}

fn end_line_of(node: Node<'_>) -> u32 {
    let end = node.end_position();
    // A node ending at column 0 stops at the newline of the previous row.
    if end.column == 0 && end.row > node.start_position().row {
        end.row as u32
    } else {
        end.row as u32 + 1
    }
}

/// Pre-order walk without recursion, so deeply nested sources cannot blow the stack.
fn walk<'t>(root: Node<'t>, mut visit: impl FnMut(Node<'t>, &mut Vec<(Node<'t>, usize)>, usize)) {
    let mut stack: Vec<(Node<'t>, usize)> = vec![(root, usize::MAX)];
    while let Some((node, ctx)) = stack.pop() {
        visit(node, &mut stack, ctx);
    }
}

fn push_children<'t>(node: Node<'t>, stack: &mut Vec<(Node<'t>, usize)>, ctx: usize) {
    let mut cursor = node.walk();
    let children: Vec<Node<'t>> = node.named_children(&mut cursor).collect();
    for child in children.into_iter().rev() {
        stack.push((child, ctx));
    }
}

/// Definitions in document order, parents before their children.
pub(crate) fn definitions(tree: &Tree, source: &str, language: Language) -> Vec<RawDefinition> {
    let mut out: Vec<RawDefinition> = Vec::new();
    walk(tree.root_node(), |node, stack, ctx| {
        let parent = (ctx != usize::MAX).then_some(ctx);
        let mut next_ctx = ctx;
        if let Some((name, kind, span)) = definition_of(node, source, language) {
            out.push(RawDefinition {
                name,
                kind,
                start_line: line_of(span),
                end_line: end_line_of(span).max(line_of(span)),
                parent,
            });
            next_ctx = out.len() - 1;
        }
        push_children(node, stack, next_ctx);
    });
    out
}

/// Name, kind and the node whose span the definition covers.
fn definition_of<'t>(node: Node<'t>, source: &str, language: Language) -> Option<(String, DefinitionKind, Node<'t>)> {
    use DefinitionKind::{Class, Function};
    let named = |field: &str, kind| {
        let name = node.child_by_field_name(field)?;
        Some((text(name, source).to_string(), kind, node))
    };
    match (language, node.kind()) {
        (Language::Python, "class_definition") => named("name", Class),
        (Language::Python, "function_definition") => named("name", Function),

        (
            Language::Java,
            "class_declaration"
            | "interface_declaration"
            | "enum_declaration"
            | "record_declaration"
            | "annotation_type_declaration",
        ) => named("name", Class),
        (Language::Java, "method_declaration" | "constructor_declaration" | "compact_constructor_declaration") => {
            named("name", Function)
        }

        (Language::JavaScript, "class_declaration" | "class") => named("name", Class),
        (Language::JavaScript, "function_declaration" | "generator_function_declaration" | "method_definition") => {
            named("name", Function)
        }
        // `const f = () => {}` binds a stable name; bare lambdas are skipped.
        (Language::JavaScript, "variable_declarator") => {
            let value = node.child_by_field_name("value")?;
            let name = node.child_by_field_name("name")?;
            if name.kind() != "identifier" {
                return None;
            }
            match value.kind() {
                "arrow_function" | "function_expression" | "function" | "generator_function" => {
                    Some((text(name, source).to_string(), Function, node))
                }
                _ => None,
            }
        }
        (Language::JavaScript, "field_definition") => {
            let value = node.child_by_field_name("value")?;
            let name = node.child_by_field_name("property")?;
            matches!(value.kind(), "arrow_function" | "function_expression" | "function")
                .then(|| (text(name, source).to_string(), Function, node))
        }

        (Language::Cpp, "class_specifier" | "struct_specifier" | "union_specifier") => {
            // Forward declarations have no body and define nothing.
            node.child_by_field_name("body")?;
            let name = node.child_by_field_name("name")?;
            Some((terminal_name(name, source)?, Class, node))
        }
        (Language::Cpp, "function_definition") => {
            let declarator = function_declarator(node)?;
            let name = declarator.child_by_field_name("declarator")?;
            Some((terminal_name(name, source)?, Function, node))
        }
        _ => None,
    }
}

/// Follows pointer/reference declarators down to the `function_declarator`.
fn function_declarator(definition: Node<'_>) -> Option<Node<'_>> {
    let mut current = definition.child_by_field_name("declarator")?;
    for _ in 0..16 {
        if current.kind() == "function_declarator" {
            return Some(current);
        }
        current = match current.child_by_field_name("declarator") {
            Some(next) => next,
            // reference_declarator carries its inner declarator unnamed
            None => current.named_child(current.named_child_count().checked_sub(1)? as u32)?,
        };
    }
    None
}

/// The last identifier of a possibly qualified or templated name:
/// `a::b::f` → `f`, `Box<T>` → `Box`, `obj.m` → `m`.
fn terminal_name(node: Node<'_>, source: &str) -> Option<String> {
    let mut current = node;
    for _ in 0..32 {
        let next = match current.kind() {
            "identifier"
            | "type_identifier"
            | "field_identifier"
            | "property_identifier"
            | "private_property_identifier"
            | "destructor_name"
            | "operator_name"
            | "namespace_identifier" => return Some(text(current, source).to_string()),
            "qualified_identifier"
            | "scoped_identifier"
            | "template_function"
            | "template_type"
            | "template_method" => current.child_by_field_name("name"),
            "field_expression" => current.child_by_field_name("field"),
            "member_expression" => current.child_by_field_name("property"),
            "attribute" => current.child_by_field_name("attribute"),
            "generic_type" | "scoped_type_identifier" => {
                let mut cursor = current.walk();
                let last = current
                    .named_children(&mut cursor)
                    .filter(|c| matches!(c.kind(), "type_identifier" | "scoped_type_identifier" | "generic_type"))
                    .last();
                last
            }
            _ => None,
        };
        current = next?;
    }
    None
}

/// Every call and `new` expression with a resolvable callee/type name.
pub(crate) fn sites(tree: &Tree, source: &str, language: Language) -> Vec<RawSite> {
    let mut out = Vec::new();
    walk(tree.root_node(), |node, stack, ctx| {
        if let Some((name_node, kind)) = site_of(node, language) {
            if let Some(name) = terminal_name(name_node, source) {
                // The callee's own token anchors the line, even for multi-line receivers.
                let anchor = innermost_name_node(name_node).unwrap_or(name_node);
                out.push(RawSite { name, line: line_of(anchor), kind });
            }
        }
        push_children(node, stack, ctx);
    });
    out
}

fn innermost_name_node(node: Node<'_>) -> Option<Node<'_>> {
    let mut current = node;
    for _ in 0..32 {
        let next = match current.kind() {
            "qualified_identifier"
            | "scoped_identifier"
            | "template_function"
            | "template_type"
            | "template_method" => current.child_by_field_name("name"),
            "field_expression" => current.child_by_field_name("field"),
            "member_expression" => current.child_by_field_name("property"),
            "attribute" => current.child_by_field_name("attribute"),
            "generic_type" | "scoped_type_identifier" => {
                let mut cursor = current.walk();
                let last = current.named_children(&mut cursor).last();
                last
            }
            _ => return Some(current),
        };
        current = next?;
    }
    None
}

fn site_of<'t>(node: Node<'t>, language: Language) -> Option<(Node<'t>, SiteKind)> {
    match (language, node.kind()) {
        (Language::Python, "call") => Some((node.child_by_field_name("function")?, SiteKind::Call)),
        (Language::Java, "method_invocation") => Some((node.child_by_field_name("name")?, SiteKind::Call)),
        (Language::Java, "object_creation_expression") => Some((node.child_by_field_name("type")?, SiteKind::New)),
        (Language::JavaScript, "call_expression") => Some((node.child_by_field_name("function")?, SiteKind::Call)),
        (Language::JavaScript, "new_expression") => Some((node.child_by_field_name("constructor")?, SiteKind::New)),
        (Language::Cpp, "call_expression") => Some((node.child_by_field_name("function")?, SiteKind::Call)),
        (Language::Cpp, "new_expression") => Some((node.child_by_field_name("type")?, SiteKind::New)),
        _ => None,
    }
}
