//! The textual relation file format and Graphviz DOT tree export.
//!
//! Relation files are line oriented, UTF-8 with LF endings:
//!
//! ```text
//! REL <arity> <|X|> <|Y|>
//! x_1 x_2 … x_n : y_1 y_2 … y_k
//! ```
//!
//! One record per domain point, any number of outputs (`k ≥ 1`) per
//! record, `#` starts a comment, unlisted inputs lie outside `dom f`.
//! [`write_relation`] emits the canonical form: records sorted by
//! mixed-radix input index, single spaces, trailing newline. The round
//! trips hold exactly: `parse ∘ write` is the identity on relations and
//! `write ∘ parse` canonicalizes valid files.
//!
//! DOT export uses the subset `digraph` / node statements / edge
//! statements with `label` attributes only. Internal nodes are labelled
//! `x<i>` with `i` counted from 1 (or caller-provided names), edges by
//! their input symbol, leaves by their output symbol; children are emitted
//! in ascending symbol order. [`parse_dot_tree`] reads back exactly the
//! default-named form that [`export_dot`] emits.

use std::fmt;

use thiserror::Error;

use crate::relation::{Alphabet, Relation, RelationError, DEFAULT_MAX_TABLE_BITS};
use crate::tree::DecisionTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("missing `REL <arity> <|X|> <|Y|>` header")]
    MissingHeader,
    #[error("malformed header, expected `REL <arity> <|X|> <|Y|>`")]
    BadHeader,
    #[error("unexpected token `{0}`")]
    BadToken(String),
    #[error("record has {got} input symbols, header arity is {expected}")]
    RecordArityMismatch { got: usize, expected: usize },
    #[error("record has no `:` separator")]
    MissingSeparator,
    #[error("record has no outputs")]
    NoOutputs,
    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },
    #[error("duplicate record for this input")]
    DuplicateRecord,
    #[error(transparent)]
    Relation(RelationError),
}

fn fail<T>(line: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, kind })
}

fn parse_usize(line: usize, token: &str) -> Result<usize, ParseError> {
    token.parse::<usize>().map_err(|_| ParseError {
        line,
        kind: ParseErrorKind::BadToken(token.to_string()),
    })
}

/// Parses the relation file format with the default table guard.
pub fn parse_relation(text: &str) -> Result<Relation, ParseError> {
    parse_relation_with_limit(text, DEFAULT_MAX_TABLE_BITS)
}

pub fn parse_relation_with_limit(text: &str, max_table_bits: u32) -> Result<Relation, ParseError> {
    let mut relation: Option<Relation> = None;
    let mut seen: Vec<bool> = Vec::new();
    let mut last_line = 0;
    for (number, raw) in text.lines().enumerate() {
        let line = number + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match relation {
            None => {
                let tokens: Vec<&str> = content.split_whitespace().collect();
                if tokens.len() != 4 || tokens[0] != "REL" {
                    return fail(line, ParseErrorKind::BadHeader);
                }
                let arity = parse_usize(line, tokens[1])?;
                let x = parse_usize(line, tokens[2])?;
                let y = parse_usize(line, tokens[3])?;
                let build = || -> Result<Relation, RelationError> {
                    Relation::empty_with_limit(
                        arity,
                        Alphabet::new(x)?,
                        Alphabet::new(y)?,
                        max_table_bits,
                    )
                };
                let rel = build().map_err(|e| ParseError {
                    line,
                    kind: ParseErrorKind::Relation(e),
                })?;
                seen = vec![false; rel.table_len()];
                relation = Some(rel);
            }
            Some(ref mut rel) => {
                let Some((left, right)) = content.split_once(':') else {
                    return fail(line, ParseErrorKind::MissingSeparator);
                };
                let inputs: Vec<usize> = left
                    .split_whitespace()
                    .map(|t| parse_usize(line, t))
                    .collect::<Result<_, _>>()?;
                if inputs.len() != rel.arity() {
                    return fail(
                        line,
                        ParseErrorKind::RecordArityMismatch {
                            got: inputs.len(),
                            expected: rel.arity(),
                        },
                    );
                }
                let index = rel.index_of(&inputs).map_err(|e| match e {
                    RelationError::SymbolOutOfRange {
                        symbol,
                        alphabet_size,
                    } => ParseError {
                        line,
                        kind: ParseErrorKind::SymbolOutOfRange {
                            symbol,
                            alphabet_size,
                        },
                    },
                    other => ParseError {
                        line,
                        kind: ParseErrorKind::Relation(other),
                    },
                })?;
                if seen[index] {
                    return fail(line, ParseErrorKind::DuplicateRecord);
                }
                seen[index] = true;
                let outputs: Vec<usize> = right
                    .split_whitespace()
                    .map(|t| parse_usize(line, t))
                    .collect::<Result<_, _>>()?;
                if outputs.is_empty() {
                    return fail(line, ParseErrorKind::NoOutputs);
                }
                for y in outputs {
                    if !rel.output_alphabet().contains(y) {
                        return fail(
                            line,
                            ParseErrorKind::SymbolOutOfRange {
                                symbol: y,
                                alphabet_size: rel.output_alphabet().size(),
                            },
                        );
                    }
                    rel.insert(&inputs, y).expect("inputs and output validated");
                }
            }
        }
    }
    match relation {
        Some(rel) => Ok(rel),
        None => fail(last_line + 1, ParseErrorKind::MissingHeader),
    }
}

/// Canonical text for a relation: header, then one record per domain point
/// in mixed-radix index order, outputs ascending, single spaces, trailing
/// newline.
pub fn write_relation(f: &Relation) -> String {
    let mut out = format!(
        "REL {} {} {}\n",
        f.arity(),
        f.input_alphabet().size(),
        f.output_alphabet().size()
    );
    let mut point = vec![0usize; f.arity()];
    for (index, mask) in f.domain_entries() {
        f.point_into(index, &mut point);
        let mut tokens: Vec<String> = point.iter().map(ToString::to_string).collect();
        tokens.push(":".to_string());
        let mut m = mask;
        while m != 0 {
            tokens.push(m.trailing_zeros().to_string());
            m &= m - 1;
        }
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

fn dot_label(variable: usize, names: Option<&[String]>) -> String {
    names
        .and_then(|ns| ns.get(variable))
        .map(|n| n.replace('"', "\\\""))
        .unwrap_or_else(|| format!("x{}", variable + 1))
}

/// Graphviz DOT text for a decision tree. Deterministic: identical trees
/// produce identical text.
pub fn export_dot(tree: &DecisionTree, names: Option<&[String]>) -> String {
    fn emit(
        tree: &DecisionTree,
        names: Option<&[String]>,
        next_id: &mut usize,
        out: &mut String,
    ) -> usize {
        let id = *next_id;
        *next_id += 1;
        match tree {
            DecisionTree::Leaf(y) => {
                out.push_str(&format!("  n{id} [label=\"{y}\"];\n"));
            }
            DecisionTree::Node { variable, children } => {
                out.push_str(&format!(
                    "  n{id} [label=\"{}\"];\n",
                    dot_label(*variable, names)
                ));
                for (symbol, child) in children.iter().enumerate() {
                    let child_id = emit(child, names, next_id, out);
                    out.push_str(&format!("  n{id} -> n{child_id} [label=\"{symbol}\"];\n"));
                }
            }
        }
        id
    }

    let mut out = String::from("digraph decision_tree {\n");
    let mut next_id = 0;
    emit(tree, names, &mut next_id, &mut out);
    out.push_str("}\n");
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DotParseError {
    #[error("line {0}: unrecognized statement")]
    BadStatement(usize),
    #[error("node {0} is missing")]
    MissingNode(usize),
    #[error("node {id} has children for symbols 0..{got}, edge labelled {label}")]
    ChildGap { id: usize, got: usize, label: usize },
    #[error("label `{0}` is neither an output symbol nor x<i>")]
    BadLabel(String),
    #[error("graph is empty")]
    Empty,
}

/// Reparses the default-named output of [`export_dot`] back into a tree.
pub fn parse_dot_tree(text: &str) -> Result<DecisionTree, DotParseError> {
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut children: Vec<Vec<(usize, usize)>> = Vec::new();

    fn node_index(token: &str) -> Option<usize> {
        token.strip_prefix('n')?.parse().ok()
    }
    fn quoted_label(token: &str) -> Option<&str> {
        token.strip_prefix("[label=\"")?.strip_suffix("\"];")
    }
    fn ensure(
        len: usize,
        labels: &mut Vec<Option<String>>,
        children: &mut Vec<Vec<(usize, usize)>>,
    ) {
        while labels.len() < len {
            labels.push(None);
            children.push(Vec::new());
        }
    }

    for (number, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with("digraph") || line == "}" {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [node, rest] => {
                let (Some(id), Some(label)) = (node_index(node), quoted_label(rest)) else {
                    return Err(DotParseError::BadStatement(number + 1));
                };
                ensure(id + 1, &mut labels, &mut children);
                labels[id] = Some(label.to_string());
            }
            [from, "->", to, rest] => {
                let (Some(a), Some(b), Some(label)) =
                    (node_index(from), node_index(to), quoted_label(rest))
                else {
                    return Err(DotParseError::BadStatement(number + 1));
                };
                let symbol: usize = label
                    .parse()
                    .map_err(|_| DotParseError::BadLabel(label.to_string()))?;
                ensure(a.max(b) + 1, &mut labels, &mut children);
                children[a].push((symbol, b));
            }
            _ => return Err(DotParseError::BadStatement(number + 1)),
        }
    }

    if labels.is_empty() {
        return Err(DotParseError::Empty);
    }

    fn build(
        id: usize,
        labels: &[Option<String>],
        children: &[Vec<(usize, usize)>],
    ) -> Result<DecisionTree, DotParseError> {
        let label = labels
            .get(id)
            .and_then(|l| l.as_ref())
            .ok_or(DotParseError::MissingNode(id))?;
        let mut edges = children[id].clone();
        if edges.is_empty() {
            let output: usize = label
                .parse()
                .map_err(|_| DotParseError::BadLabel(label.clone()))?;
            return Ok(DecisionTree::Leaf(output));
        }
        let variable: usize = label
            .strip_prefix('x')
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&v| v >= 1)
            .map(|v| v - 1)
            .ok_or_else(|| DotParseError::BadLabel(label.clone()))?;
        edges.sort_by_key(|&(symbol, _)| symbol);
        let mut kids = Vec::with_capacity(edges.len());
        for (expected, &(symbol, child)) in edges.iter().enumerate() {
            if symbol != expected {
                return Err(DotParseError::ChildGap {
                    id,
                    got: expected,
                    label: symbol,
                });
            }
            kids.push(build(child, labels, children)?);
        }
        Ok(DecisionTree::node(variable, kids))
    }

    build(0, &labels, &children)
}

impl fmt::Display for DecisionTree {
    /// Compact one-line rendering, mostly for error messages and logs.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionTree::Leaf(y) => write!(f, "{y}"),
            DecisionTree::Node { variable, children } => {
                write!(f, "x{}(", variable + 1)?;
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{child}")?;
                }
                write!(f, ")")
            }
        }
    }
}
