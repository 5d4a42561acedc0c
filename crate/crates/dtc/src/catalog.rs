//! Small named relations and trees shared by tests, the harness and the
//! gap search.

use crate::relation::{Alphabet, Relation};
use crate::tree::DecisionTree;

fn ternary() -> Alphabet {
    Alphabet::new(3).expect("static alphabet")
}

/// The identity function on one bit.
pub fn identity1() -> Relation {
    Relation::from_total_fn(1, Alphabet::binary(), Alphabet::binary(), |x| x[0])
        .expect("static table")
}

/// The total one-bit relation that is constant `value` (non-trivial).
pub fn constant_one_bit(value: usize) -> Relation {
    Relation::from_total_fn(1, Alphabet::binary(), Alphabet::binary(), |_| value)
        .expect("static table")
}

pub fn and2() -> Relation {
    Relation::from_total_fn(2, Alphabet::binary(), Alphabet::binary(), |x| x[0] & x[1])
        .expect("static table")
}

pub fn or2() -> Relation {
    Relation::from_total_fn(2, Alphabet::binary(), Alphabet::binary(), |x| x[0] | x[1])
        .expect("static table")
}

pub fn xor2() -> Relation {
    Relation::from_total_fn(2, Alphabet::binary(), Alphabet::binary(), |x| x[0] ^ x[1])
        .expect("static table")
}

/// Not-all-equal on three bits: 1 unless all inputs agree.
pub fn nae3() -> Relation {
    Relation::from_total_fn(3, Alphabet::binary(), Alphabet::binary(), |x| {
        usize::from(!(x[0] == x[1] && x[1] == x[2]))
    })
    .expect("static table")
}

/// Inner half of the canonical strict-gap composition: a two-bit function
/// into `{0, 1, 2}` whose worst-case input does not produce a worst-case
/// intermediate symbol for [`gap_outer`].
pub fn gap_inner() -> Relation {
    Relation::from_pairs(
        2,
        Alphabet::binary(),
        ternary(),
        &[
            (vec![0, 0], 0),
            (vec![0, 1], 0),
            (vec![1, 0], 1),
            (vec![1, 1], 2),
        ],
    )
    .expect("static table")
}

/// Outer half of the canonical strict-gap composition, over two ternary
/// inputs: `g(0, y₂) = y₂`, `g(1, ·) = 1`, `g(2, ·) = 2`.
pub fn gap_outer() -> Relation {
    Relation::from_total_fn(
        2,
        ternary(),
        ternary(),
        |y| if y[0] == 0 { y[1] } else { y[0] },
    )
    .expect("static table")
}

/// An optimal tree for [`gap_inner`]: query x₁, then x₂ only on the 1
/// branch.
pub fn gap_inner_tree() -> DecisionTree {
    DecisionTree::node(
        0,
        vec![
            DecisionTree::Leaf(0),
            DecisionTree::node(1, vec![DecisionTree::Leaf(1), DecisionTree::Leaf(2)]),
        ],
    )
}

/// An optimal tree for [`gap_outer`]: query y₁, then y₂ only on the 0
/// branch.
pub fn gap_outer_tree() -> DecisionTree {
    DecisionTree::node(
        0,
        vec![
            DecisionTree::node(
                1,
                vec![
                    DecisionTree::Leaf(0),
                    DecisionTree::Leaf(1),
                    DecisionTree::Leaf(2),
                ],
            ),
            DecisionTree::Leaf(1),
            DecisionTree::Leaf(2),
        ],
    )
}

/// A depth-3 tree for the composition of [`gap_outer`] with two copies of
/// [`gap_inner`], one query below the product of the parts.
pub fn gap_composed_tree() -> DecisionTree {
    DecisionTree::node(
        0,
        vec![
            DecisionTree::node(
                2,
                vec![
                    DecisionTree::Leaf(0),
                    DecisionTree::node(3, vec![DecisionTree::Leaf(1), DecisionTree::Leaf(2)]),
                ],
            ),
            DecisionTree::node(1, vec![DecisionTree::Leaf(1), DecisionTree::Leaf(2)]),
        ],
    )
}

/// The joint-evaluation outer relation on `n` boolean inputs: maps `y` to
/// the single output with coordinate `i` of `y` at bit `i`. Composing it
/// with boolean relations is the reference point for `tuple`.
pub fn tupling_outer(n: usize) -> Relation {
    assert!(n <= 6, "joint output alphabet is capped at 64 symbols");
    Relation::from_total_fn(
        n,
        Alphabet::binary(),
        Alphabet::new(1 << n).expect("static alphabet"),
        |y| {
            y.iter()
                .enumerate()
                .fold(0usize, |acc, (i, &bit)| acc | (bit << i))
        },
    )
    .expect("static table")
}
