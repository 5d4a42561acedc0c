//! Exact weighted decision tree complexity.
//!
//! `D(f, [w_1, …, w_n])` is 0 exactly when `f` is constant; otherwise it is
//! the minimum over variables `i` of `w_i` plus the worst restriction cost
//! `max_b D(f_{i←b}, w)`. The solver evaluates this recurrence with a memo
//! table keyed by [`CanonicalKey`] of the restricted relation, so permuted
//! restriction orders share entries.
//!
//! The minimum ranges over [`Relation::live_variables`] only. Restricting a
//! variable on which the domain does not branch returns `f` itself on one
//! branch, so its candidate value is `D(f) + w_i` and can never beat a live
//! variable; a non-constant relation always has a live one. Restricting a
//! live variable strictly shrinks the domain, so the recursion terminates
//! even with zero weights.
//!
//! Ties break toward the smallest variable index, and constant relations
//! yield a leaf labelled the smallest valid output, making values, trees
//! and stats fully deterministic.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use thiserror::Error;

use crate::relation::{CanonicalKey, Relation, DEFAULT_MAX_TABLE_BITS};
use crate::tree::DecisionTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("weight vector has length {got}, expected arity {expected}")]
    WeightLengthMismatch { got: usize, expected: usize },
    #[error("relation table of {table_len} entries exceeds the 2^{max_bits} solve guard")]
    RelationTooLarge { table_len: usize, max_bits: u32 },
    #[error("weighted complexity overflows 64 bits")]
    Overflow,
}

/// Per-variable nonnegative query costs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector(Vec<u64>);

impl WeightVector {
    pub fn new(weights: Vec<u64>) -> Self {
        WeightVector(weights)
    }

    /// All-ones weights; `D(f) = D(f, [1, …, 1])`.
    pub fn unit(len: usize) -> Self {
        WeightVector(vec![1; len])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

impl Deref for WeightVector {
    type Target = [u64];

    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for WeightVector {
    fn from(weights: Vec<u64>) -> Self {
        WeightVector(weights)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

impl FromStr for WeightVector {
    type Err = std::num::ParseIntError;

    /// Parses a comma-separated list such as `1,2,3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map(WeightVector)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Reject relations whose table exceeds `2^max_table_bits` entries.
    pub max_table_bits: u32,
    /// Stop evaluating a candidate variable as soon as its partial branch
    /// maximum already matches or exceeds the best candidate. The cut is
    /// exact: values and trees are identical with it on or off, only the
    /// stats differ.
    pub exact_prune: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_table_bits: DEFAULT_MAX_TABLE_BITS,
            exact_prune: true,
        }
    }
}

/// Solve counters. `nodes_explored` counts recurrence evaluations including
/// constant leaves and memo returns; `memo_hits` counts returns served from
/// the memo; `memo_entries` is the final memo size.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes_explored: u64,
    pub memo_hits: u64,
    pub memo_entries: u64,
}

/// Exact complexity value plus solve statistics and, when requested, an
/// optimal tree witnessing the value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityResult {
    pub value: u64,
    pub tree: Option<DecisionTree>,
    pub stats: SolveStats,
}

#[derive(Clone, Copy)]
struct MemoEntry {
    value: u64,
    best_variable: u32,
}

struct Engine<'a> {
    weights: &'a [u64],
    prune: bool,
    memo: HashMap<CanonicalKey, MemoEntry>,
    stats: SolveStats,
}

impl Engine<'_> {
    fn solve_value(&mut self, f: &Relation) -> Result<u64, SolveError> {
        self.stats.nodes_explored += 1;
        if f.is_constant() {
            return Ok(0);
        }
        let key = f.canonical_key();
        if let Some(entry) = self.memo.get(&key) {
            self.stats.memo_hits += 1;
            return Ok(entry.value);
        }
        let live = f.live_variables();
        debug_assert!(
            !live.is_empty(),
            "non-constant relation has a live variable"
        );
        let mut best = u64::MAX;
        let mut best_variable = 0u32;
        for variable in live {
            let weight = self.weights[variable];
            let mut worst = 0u64;
            let mut abandoned = false;
            for symbol in f.input_alphabet().symbols() {
                let child = f
                    .restrict(variable, symbol)
                    .expect("live variable and symbol are in range");
                worst = worst.max(self.solve_value(&child)?);
                if self.prune {
                    if let Some(partial) = worst.checked_add(weight) {
                        if partial >= best {
                            abandoned = true;
                            break;
                        }
                    }
                }
            }
            if abandoned {
                continue;
            }
            let candidate = worst.checked_add(weight).ok_or(SolveError::Overflow)?;
            if candidate < best {
                best = candidate;
                best_variable = variable as u32;
            }
        }
        self.memo.insert(
            key,
            MemoEntry {
                value: best,
                best_variable,
            },
        );
        Ok(best)
    }

    /// Replays the memoized choices into an explicit tree. Constant
    /// relations become a leaf labelled their smallest valid output.
    fn extract_tree(&self, f: &Relation) -> DecisionTree {
        if f.is_constant() {
            return DecisionTree::Leaf(f.common_outputs().trailing_zeros() as usize);
        }
        let entry = self
            .memo
            .get(&f.canonical_key())
            .copied()
            .expect("every reachable state was solved");
        let variable = entry.best_variable as usize;
        let children = f
            .input_alphabet()
            .symbols()
            .map(|symbol| self.extract_tree(&f.restrict(variable, symbol).expect("in range")))
            .collect();
        DecisionTree::node(variable, children)
    }
}

/// Full-control entry point; one fresh memo table per call.
pub fn solve(
    f: &Relation,
    weights: &WeightVector,
    options: &SolveOptions,
    want_tree: bool,
) -> Result<ComplexityResult, SolveError> {
    if weights.len() != f.arity() {
        return Err(SolveError::WeightLengthMismatch {
            got: weights.len(),
            expected: f.arity(),
        });
    }
    let limit = 1u128 << options.max_table_bits.min(100);
    if f.table_len() as u128 > limit {
        return Err(SolveError::RelationTooLarge {
            table_len: f.table_len(),
            max_bits: options.max_table_bits,
        });
    }
    let mut engine = Engine {
        weights,
        prune: options.exact_prune,
        memo: HashMap::new(),
        stats: SolveStats::default(),
    };
    let value = engine.solve_value(f)?;
    let tree = want_tree.then(|| engine.extract_tree(f));
    engine.stats.memo_entries = engine.memo.len() as u64;
    Ok(ComplexityResult {
        value,
        tree,
        stats: engine.stats,
    })
}

/// `D(f, w)` with default options and no tree extraction.
pub fn complexity(f: &Relation, weights: &WeightVector) -> Result<ComplexityResult, SolveError> {
    solve(f, weights, &SolveOptions::default(), false)
}

/// An optimal tree for `f` under `w`: it computes `f` and its weighted
/// depth equals `D(f, w)`.
pub fn optimal_tree(f: &Relation, weights: &WeightVector) -> Result<DecisionTree, SolveError> {
    solve(f, weights, &SolveOptions::default(), true)
        .map(|result| result.tree.expect("tree was requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::relation::{compose, Alphabet, Relation};
    use crate::tree::tree_computes;

    fn unit(n: usize) -> WeightVector {
        WeightVector::unit(n)
    }

    #[test]
    fn gap_inner_needs_two_queries() {
        let f = catalog::gap_inner();
        assert_eq!(complexity(&f, &unit(2)).unwrap().value, 2);
    }

    #[test]
    fn gap_composed_needs_three_queries() {
        let f = catalog::gap_inner();
        let h = compose(
            &catalog::gap_outer(),
            &[f.clone(), f],
            crate::DEFAULT_MAX_TABLE_BITS,
        )
        .unwrap();
        assert_eq!(complexity(&h, &unit(4)).unwrap().value, 3);
    }

    #[test]
    fn constants_cost_nothing() {
        let constant =
            Relation::from_total_fn(3, Alphabet::binary(), Alphabet::binary(), |_| 1).unwrap();
        let result = complexity(&constant, &WeightVector::new(vec![7, 7, 7])).unwrap();
        assert_eq!(result.value, 0);

        let empty = Relation::empty(2, Alphabet::binary(), Alphabet::binary()).unwrap();
        assert_eq!(complexity(&empty, &unit(2)).unwrap().value, 0);
    }

    #[test]
    fn weighted_or_matches_enumeration() {
        // Both variable orders cost 8 under weights [3, 5]; the oracle
        // confirms it in the oracle module's tests.
        let or = catalog::or2();
        assert_eq!(
            complexity(&or, &WeightVector::new(vec![3, 5]))
                .unwrap()
                .value,
            8
        );
    }

    #[test]
    fn gap_outer_under_doubled_weights() {
        let g = catalog::gap_outer();
        assert_eq!(
            complexity(&g, &WeightVector::new(vec![2, 2]))
                .unwrap()
                .value,
            4
        );
        assert_eq!(complexity(&g, &unit(2)).unwrap().value, 2);
    }

    #[test]
    fn optimal_tree_reproduces_gap_trees() {
        let f = catalog::gap_inner();
        assert_eq!(
            optimal_tree(&f, &unit(2)).unwrap(),
            catalog::gap_inner_tree()
        );

        let g = catalog::gap_outer();
        assert_eq!(
            optimal_tree(&g, &unit(2)).unwrap(),
            catalog::gap_outer_tree()
        );

        let h = compose(&g, &[f.clone(), f], crate::DEFAULT_MAX_TABLE_BITS).unwrap();
        assert_eq!(
            optimal_tree(&h, &unit(4)).unwrap(),
            catalog::gap_composed_tree()
        );
    }

    #[test]
    fn optimal_tree_of_constant_is_smallest_leaf() {
        let constant =
            Relation::from_total_fn(2, Alphabet::binary(), Alphabet::new(3).unwrap(), |_| 2)
                .unwrap();
        assert_eq!(
            optimal_tree(&constant, &unit(2)).unwrap(),
            DecisionTree::Leaf(2)
        );

        let empty = Relation::empty(1, Alphabet::binary(), Alphabet::new(3).unwrap()).unwrap();
        assert_eq!(
            optimal_tree(&empty, &unit(1)).unwrap(),
            DecisionTree::Leaf(0)
        );
    }

    #[test]
    fn optimal_tree_for_xor_is_full() {
        let xor = catalog::xor2();
        let tree = optimal_tree(&xor, &unit(2)).unwrap();
        assert_eq!(tree.leaf_count(), 4);
        assert_eq!(tree.depth(), 2);
        assert!(tree_computes(&tree, &xor).unwrap());
        assert_eq!(tree.weighted_depth(&[1, 1]).unwrap(), 2);
    }

    #[test]
    fn zero_weights_are_free() {
        let xor = catalog::xor2();
        assert_eq!(
            complexity(&xor, &WeightVector::new(vec![0, 0]))
                .unwrap()
                .value,
            0
        );
        assert_eq!(
            complexity(&xor, &WeightVector::new(vec![0, 3]))
                .unwrap()
                .value,
            3
        );
    }

    #[test]
    fn weight_length_checked() {
        let err = complexity(&catalog::xor2(), &unit(3)).unwrap_err();
        assert!(matches!(err, SolveError::WeightLengthMismatch { .. }));
    }

    #[test]
    fn table_guard_checked() {
        let f = catalog::xor2();
        let opts = SolveOptions {
            max_table_bits: 1,
            ..SolveOptions::default()
        };
        let err = solve(&f, &unit(2), &opts, false).unwrap_err();
        assert!(matches!(err, SolveError::RelationTooLarge { .. }));
    }

    #[test]
    fn deterministic_across_runs_and_prune_settings() {
        let f = catalog::nae3();
        let a = complexity(&f, &unit(3)).unwrap();
        let b = complexity(&f, &unit(3)).unwrap();
        assert_eq!(a, b);

        let plain = SolveOptions {
            exact_prune: false,
            ..SolveOptions::default()
        };
        let c = solve(&f, &unit(3), &plain, true).unwrap();
        let d = solve(&f, &unit(3), &SolveOptions::default(), true).unwrap();
        assert_eq!(c.value, d.value);
        assert_eq!(c.tree, d.tree);
    }

    #[test]
    fn stats_are_populated() {
        let result = complexity(&catalog::nae3(), &unit(3)).unwrap();
        assert!(result.stats.nodes_explored > 0);
        assert!(result.stats.memo_entries > 0);
    }

    #[test]
    fn weight_parsing_round_trips() {
        let w: WeightVector = "3, 5,8".parse().unwrap();
        assert_eq!(w.as_slice(), &[3, 5, 8]);
        assert_eq!(w.to_string(), "3,5,8");
        assert!("1,x".parse::<WeightVector>().is_err());
    }
}
