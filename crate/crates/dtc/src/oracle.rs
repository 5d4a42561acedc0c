//! Brute-force cross-check for the solver.
//!
//! [`oracle_complexity`] finds the least weighted depth of any decision
//! tree computing `f` within a budget, by direct enumeration of tree
//! shapes over explicit domain point lists. It deliberately shares nothing
//! with the memoized solver: no memo table, no canonical keys, no
//! live-variable analysis, no tie-breaking — every unqueried variable is a
//! candidate at every node, dead ones included. Intended for tiny
//! instances.
//!
//! Re-querying a variable already fixed on the current path is skipped:
//! all remaining points take a single branch, so the re-query spends its
//! weight for an otherwise identical subproblem and can never shorten a
//! tree (and with zero weights it would never terminate).

use thiserror::Error;

use crate::relation::Relation;
use crate::solver::WeightVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("weight vector has length {got}, expected arity {expected}")]
    WeightLengthMismatch { got: usize, expected: usize },
    #[error("enumeration node cap of {0} exceeded")]
    NodeCapExceeded(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Abort enumeration after visiting this many search nodes.
    pub node_cap: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            node_cap: 10_000_000,
        }
    }
}

struct Search<'a> {
    points: Vec<(Vec<usize>, u64)>,
    base: usize,
    weights: &'a [u64],
    node_cap: u64,
    nodes: u64,
}

impl Search<'_> {
    /// Least weighted depth of a tree that outputs an allowed symbol at
    /// every listed point, or `None` if no such tree fits the budget.
    fn min_depth(
        &mut self,
        point_ids: &[usize],
        fixed: &mut [bool],
        budget: u64,
    ) -> Result<Option<u64>, OracleError> {
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return Err(OracleError::NodeCapExceeded(self.node_cap));
        }
        if point_ids.is_empty() {
            return Ok(Some(0));
        }
        let mut common = u64::MAX;
        for &id in point_ids {
            common &= self.points[id].1;
        }
        if common != 0 {
            // A bare leaf works; nothing can beat zero queries.
            return Ok(Some(0));
        }
        let mut best: Option<u64> = None;
        for variable in 0..fixed.len() {
            if fixed[variable] {
                continue;
            }
            let weight = self.weights[variable];
            if weight > budget {
                continue;
            }
            fixed[variable] = true;
            let mut worst = 0u64;
            let mut all_branches_ok = true;
            for symbol in 0..self.base {
                let branch: Vec<usize> = point_ids
                    .iter()
                    .copied()
                    .filter(|&id| self.points[id].0[variable] == symbol)
                    .collect();
                match self.min_depth(&branch, fixed, budget - weight)? {
                    Some(depth) => worst = worst.max(depth),
                    None => {
                        all_branches_ok = false;
                        break;
                    }
                }
            }
            fixed[variable] = false;
            if all_branches_ok {
                let candidate = weight + worst;
                best = Some(best.map_or(candidate, |b| b.min(candidate)));
            }
        }
        Ok(best)
    }
}

/// Least weighted depth of any decision tree computing `f`, or `None` if
/// no tree of weighted depth at most `budget` computes it. Default node
/// cap.
pub fn oracle_complexity(
    f: &Relation,
    weights: &WeightVector,
    budget: u64,
) -> Result<Option<u64>, OracleError> {
    oracle_complexity_with(f, weights, budget, &OracleOptions::default())
}

pub fn oracle_complexity_with(
    f: &Relation,
    weights: &WeightVector,
    budget: u64,
    options: &OracleOptions,
) -> Result<Option<u64>, OracleError> {
    if weights.len() != f.arity() {
        return Err(OracleError::WeightLengthMismatch {
            got: weights.len(),
            expected: f.arity(),
        });
    }
    let points: Vec<(Vec<usize>, u64)> = f
        .domain_entries()
        .map(|(idx, mask)| (f.point_of(idx), mask))
        .collect();
    let ids: Vec<usize> = (0..points.len()).collect();
    let mut search = Search {
        points,
        base: f.input_alphabet().size(),
        weights,
        node_cap: options.node_cap,
        nodes: 0,
    };
    let mut fixed = vec![false; f.arity()];
    search.min_depth(&ids, &mut fixed, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::relation::{Alphabet, Relation};

    fn unit(n: usize) -> WeightVector {
        WeightVector::unit(n)
    }

    #[test]
    fn gap_inner_within_budget_four() {
        let f = catalog::gap_inner();
        assert_eq!(oracle_complexity(&f, &unit(2), 4).unwrap(), Some(2));
    }

    #[test]
    fn constant_relation_budget_zero() {
        let constant =
            Relation::from_total_fn(2, Alphabet::binary(), Alphabet::binary(), |_| 0).unwrap();
        assert_eq!(oracle_complexity(&constant, &unit(2), 0).unwrap(), Some(0));
    }

    #[test]
    fn and_budget_boundary() {
        let and = catalog::and2();
        assert_eq!(oracle_complexity(&and, &unit(2), 1).unwrap(), None);
        assert_eq!(oracle_complexity(&and, &unit(2), 2).unwrap(), Some(2));
    }

    #[test]
    fn weighted_or_budget_boundary() {
        let or = catalog::or2();
        let w = WeightVector::new(vec![3, 5]);
        assert_eq!(oracle_complexity(&or, &w, 8).unwrap(), Some(8));
        assert_eq!(oracle_complexity(&or, &w, 7).unwrap(), None);
    }

    #[test]
    fn empty_relation_needs_nothing() {
        let empty = Relation::empty(3, Alphabet::binary(), Alphabet::binary()).unwrap();
        assert_eq!(oracle_complexity(&empty, &unit(3), 0).unwrap(), Some(0));
    }

    #[test]
    fn node_cap_trips() {
        let f = catalog::nae3();
        let tight = OracleOptions { node_cap: 1 };
        assert!(matches!(
            oracle_complexity_with(&f, &unit(3), 3, &tight),
            Err(OracleError::NodeCapExceeded(1))
        ));
    }

    #[test]
    fn weight_length_checked() {
        let err = oracle_complexity(&catalog::xor2(), &unit(1), 2).unwrap_err();
        assert!(matches!(err, OracleError::WeightLengthMismatch { .. }));
    }

    #[test]
    fn nae3_needs_three_queries() {
        let nae = catalog::nae3();
        assert_eq!(oracle_complexity(&nae, &unit(3), 3).unwrap(), Some(3));
        assert_eq!(oracle_complexity(&nae, &unit(3), 2).unwrap(), None);
    }

    #[test]
    fn agrees_with_solver_on_partial_relations_and_zero_weights() {
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(0xDEC1);
        for _ in 0..60 {
            let arity = 1 + rng.next_below(3) as usize;
            let output = Alphabet::new(1 + rng.next_below(3) as usize).unwrap();
            let rel = crate::harness::random_relation(
                &mut rng,
                arity,
                Alphabet::binary(),
                output,
                0.55,
                false,
            )
            .unwrap();
            let weights = WeightVector::new((0..arity).map(|_| rng.next_below(3)).collect());
            let budget: u64 = weights.iter().sum();
            let solver_value = crate::complexity(&rel, &weights).unwrap().value;
            let oracle_value = oracle_complexity(&rel, &weights, budget).unwrap();
            assert_eq!(oracle_value, Some(solver_value));
        }
    }
}
