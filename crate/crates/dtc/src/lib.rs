//! Exact decision tree complexity of relations over finite alphabets.
//!
//! The crate is organised around a single data structure, [`Relation`]: a
//! finite relation `f ⊆ Xⁿ × Y` stored as a dense table of allowed-output
//! bit sets. On top of it sit
//!
//! * an algebra of relations ([`relation`]): restriction, composition,
//!   constant substitution, iteration and tupling;
//! * a memoized minimax solver ([`solver`]) for the exact weighted decision
//!   tree complexity `D(f, [w_1, …, w_n])`, including optimal tree
//!   extraction;
//! * an independent brute-force oracle ([`oracle`]) that enumerates tree
//!   shapes directly, used to cross-check the solver;
//! * a randomized verification harness ([`harness`]) for the composition,
//!   iteration, direct-sum and uniform-composition laws of decision tree
//!   complexity;
//! * a textual relation file format and Graphviz DOT tree export ([`io`]).
//!
//! The `dtc` binary exposes all of the above as subcommands.

pub mod catalog;
pub mod harness;
pub mod io;
pub mod oracle;
pub mod relation;
pub mod rng;
pub mod solver;
pub mod tree;

pub use oracle::{oracle_complexity, OracleError, OracleOptions};
pub use relation::{
    compose, iterate, substitute_constants, tuple, Alphabet, CanonicalKey, Relation, RelationError,
    DEFAULT_MAX_TABLE_BITS, MAX_OUTPUT_SYMBOLS,
};
pub use solver::{
    complexity, optimal_tree, solve, ComplexityResult, SolveError, SolveOptions, SolveStats,
    WeightVector,
};
pub use tree::{tree_computes, DecisionTree, TreeError};
