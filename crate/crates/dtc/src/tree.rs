//! `|X|`-ary decision trees.
//!
//! An internal node queries one input variable and has exactly one child
//! per input symbol (child `b` is taken on reading `b`); leaves carry an
//! output symbol. A tree computes a relation `f` when its output on every
//! point of `dom f` is an allowed output of `f` there.

use thiserror::Error;

use crate::relation::{Alphabet, Relation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node for variable {variable} has {got} children, expected {expected}")]
    WrongFanOut {
        variable: usize,
        got: usize,
        expected: usize,
    },
    #[error("variable index {index} out of range for arity {arity}")]
    VariableOutOfRange { index: usize, arity: usize },
    #[error("leaf output {output} out of range for alphabet of size {alphabet_size}")]
    OutputOutOfRange { output: usize, alphabet_size: usize },
    #[error("input symbol {symbol} has no child edge (fan-out {fan_out})")]
    SymbolOutOfRange { symbol: usize, fan_out: usize },
    #[error("weight vector has {got} entries, variable {variable} needs more")]
    WeightLengthMismatch { got: usize, variable: usize },
    #[error("weighted depth overflows 64 bits")]
    DepthOverflow,
}

/// A rooted `|X|`-ary decision tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionTree {
    Leaf(usize),
    Node {
        variable: usize,
        children: Vec<DecisionTree>,
    },
}

impl DecisionTree {
    pub fn leaf(output: usize) -> Self {
        DecisionTree::Leaf(output)
    }

    pub fn node(variable: usize, children: Vec<DecisionTree>) -> Self {
        DecisionTree::Node { variable, children }
    }

    /// Follows the edge labelled `x[variable]` at every node and returns the
    /// label of the leaf reached.
    pub fn evaluate(&self, x: &[usize]) -> Result<usize, TreeError> {
        let mut current = self;
        loop {
            match current {
                DecisionTree::Leaf(y) => return Ok(*y),
                DecisionTree::Node { variable, children } => {
                    let &symbol = x.get(*variable).ok_or(TreeError::VariableOutOfRange {
                        index: *variable,
                        arity: x.len(),
                    })?;
                    current = children.get(symbol).ok_or(TreeError::SymbolOutOfRange {
                        symbol,
                        fan_out: children.len(),
                    })?;
                }
            }
        }
    }

    /// Maximum over root-to-leaf paths of the summed weights of the queried
    /// variables.
    pub fn weighted_depth(&self, weights: &[u64]) -> Result<u64, TreeError> {
        match self {
            DecisionTree::Leaf(_) => Ok(0),
            DecisionTree::Node { variable, children } => {
                let w = *weights
                    .get(*variable)
                    .ok_or(TreeError::WeightLengthMismatch {
                        got: weights.len(),
                        variable: *variable,
                    })?;
                let mut worst = 0u64;
                for child in children {
                    worst = worst.max(child.weighted_depth(weights)?);
                }
                w.checked_add(worst).ok_or(TreeError::DepthOverflow)
            }
        }
    }

    /// Checks fan-out, variable indices and leaf labels against the given
    /// shape.
    pub fn validate(
        &self,
        arity: usize,
        input: Alphabet,
        output: Alphabet,
    ) -> Result<(), TreeError> {
        match self {
            DecisionTree::Leaf(y) => {
                if !output.contains(*y) {
                    return Err(TreeError::OutputOutOfRange {
                        output: *y,
                        alphabet_size: output.size(),
                    });
                }
                Ok(())
            }
            DecisionTree::Node { variable, children } => {
                if *variable >= arity {
                    return Err(TreeError::VariableOutOfRange {
                        index: *variable,
                        arity,
                    });
                }
                if children.len() != input.size() {
                    return Err(TreeError::WrongFanOut {
                        variable: *variable,
                        got: children.len(),
                        expected: input.size(),
                    });
                }
                for child in children {
                    child.validate(arity, input, output)?;
                }
                Ok(())
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 1,
            DecisionTree::Node { children, .. } => children.iter().map(Self::leaf_count).sum(),
        }
    }

    /// Unweighted depth: the longest root-to-leaf query count.
    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { children, .. } => {
                1 + children.iter().map(Self::depth).max().unwrap_or(0)
            }
        }
    }
}

/// True when `evaluate(tree, x)` is an allowed output of `f` at every point
/// of `dom f`. Vacuously true on the empty relation.
pub fn tree_computes(tree: &DecisionTree, f: &Relation) -> Result<bool, TreeError> {
    tree.validate(f.arity(), f.input_alphabet(), f.output_alphabet())?;
    let mut point = vec![0usize; f.arity()];
    for (idx, mask) in f.domain_entries() {
        f.point_into(idx, &mut point);
        let y = tree.evaluate(&point)?;
        if mask & (1u64 << y) == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}
