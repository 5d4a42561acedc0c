//! Relations over finite alphabets and the algebra on them.
//!
//! A [`Relation`] is a finite relation `f ⊆ Xⁿ × Y`, stored densely: one
//! table entry per input point `x ∈ Xⁿ` (mixed-radix index, variable 0 most
//! significant), each entry the set of allowed outputs as a `u64` bit set.
//! `dom f` is the set of points with a nonempty entry; the all-empty table
//! is the empty relation.
//!
//! Relations are immutable values after construction and safe to share
//! across threads.

use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tree::{DecisionTree, TreeError};

/// Default cap on dense table sizes: at most `2^24` entries.
pub const DEFAULT_MAX_TABLE_BITS: u32 = 24;

/// Largest supported output alphabet; output sets are stored as `u64` masks.
pub const MAX_OUTPUT_SYMBOLS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("output alphabet has {0} symbols, at most {MAX_OUTPUT_SYMBOLS} are supported")]
    OutputAlphabetTooLarge(usize),
    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },
    #[error("input vector has length {got}, expected arity {expected}")]
    ArityMismatch { got: usize, expected: usize },
    #[error("variable index {index} out of range for arity {arity}")]
    VariableOutOfRange { index: usize, arity: usize },
    #[error("table of {base}^{arity} entries exceeds the 2^{max_bits} guard")]
    TableTooLarge {
        base: usize,
        arity: usize,
        max_bits: u32,
    },
    #[error("table has {got} entries, expected {expected}")]
    TableLengthMismatch { got: usize, expected: usize },
    #[error("table entry {index} uses output bits outside the alphabet")]
    StrayOutputBits { index: usize },
    #[error("input alphabets differ: {0} symbols vs {1}")]
    InputAlphabetMismatch(usize, usize),
    #[error("relation {index} outputs over {got} symbols, expected {expected}")]
    IntermediateAlphabetMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("outer relation has arity {outer_arity} but {inner_count} inner relations were given")]
    CompositionArityMismatch {
        outer_arity: usize,
        inner_count: usize,
    },
    #[error("inner relation {0} is trivial")]
    TrivialInner(usize),
    #[error("relation {0} is not boolean-valued")]
    NotBooleanValued(usize),
    #[error("relation is not a total boolean function")]
    NotTotalBoolean,
    #[error("iteration count must be at least 1")]
    ZeroIterations,
    #[error("malformed decision tree: {0}")]
    Tree(#[from] TreeError),
}

/// A finite alphabet; its symbols are the integers `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self, RelationError> {
        if size == 0 {
            return Err(RelationError::EmptyAlphabet);
        }
        Ok(Alphabet { size })
    }

    /// The two-symbol alphabet `{0, 1}`.
    pub const fn binary() -> Self {
        Alphabet { size: 2 }
    }

    pub const fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, symbol: usize) -> bool {
        symbol < self.size
    }

    pub fn symbols(&self) -> std::ops::Range<usize> {
        0..self.size
    }
}

/// Digest identifying a relation up to (arity, alphabet sizes, table words).
///
/// Computed as SHA-256 over the 64-bit little-endian serialization of
/// `arity, |X|, |Y|` followed by the raw table words in index order. Equal
/// relations produce equal keys; the solver memoizes on it.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CanonicalKey([u8; 32]);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// Short hex prefix, enough to tell instances apart in reports.
    pub fn short_hex(&self) -> String {
        self.0[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({}…)", self.short_hex())
    }
}

fn checked_table_len(input: Alphabet, arity: usize, max_bits: u32) -> Result<usize, RelationError> {
    let limit: u128 = 1u128 << max_bits.min(100);
    let mut len: u128 = 1;
    for _ in 0..arity {
        len = len
            .checked_mul(input.size() as u128)
            .filter(|&l| l <= limit)
            .ok_or(RelationError::TableTooLarge {
                base: input.size(),
                arity,
                max_bits,
            })?;
    }
    Ok(len as usize)
}

/// A finite relation `f ⊆ Xⁿ × Y` over dense storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    arity: usize,
    input: Alphabet,
    output: Alphabet,
    table: Vec<u64>,
}

impl Relation {
    /// The empty relation (`dom f = ∅`) of the given shape.
    pub fn empty(arity: usize, input: Alphabet, output: Alphabet) -> Result<Self, RelationError> {
        Self::empty_with_limit(arity, input, output, DEFAULT_MAX_TABLE_BITS)
    }

    pub fn empty_with_limit(
        arity: usize,
        input: Alphabet,
        output: Alphabet,
        max_table_bits: u32,
    ) -> Result<Self, RelationError> {
        if output.size() > MAX_OUTPUT_SYMBOLS {
            return Err(RelationError::OutputAlphabetTooLarge(output.size()));
        }
        let len = checked_table_len(input, arity, max_table_bits)?;
        Ok(Relation {
            arity,
            input,
            output,
            table: vec![0; len],
        })
    }

    /// Builds a relation from explicit `(x, y)` pairs. Duplicates are
    /// idempotent.
    pub fn from_pairs(
        arity: usize,
        input: Alphabet,
        output: Alphabet,
        pairs: &[(Vec<usize>, usize)],
    ) -> Result<Self, RelationError> {
        let mut rel = Self::empty(arity, input, output)?;
        for (x, y) in pairs {
            rel.insert(x, *y)?;
        }
        Ok(rel)
    }

    /// Builds a relation directly from a table of output masks.
    pub fn from_table(
        arity: usize,
        input: Alphabet,
        output: Alphabet,
        table: Vec<u64>,
    ) -> Result<Self, RelationError> {
        let mut rel = Self::empty(arity, input, output)?;
        if table.len() != rel.table.len() {
            return Err(RelationError::TableLengthMismatch {
                got: table.len(),
                expected: rel.table.len(),
            });
        }
        let full = rel.full_output_mask();
        if let Some(index) = table.iter().position(|&m| m & !full != 0) {
            return Err(RelationError::StrayOutputBits { index });
        }
        rel.table = table;
        Ok(rel)
    }

    /// The total-function relation computed by a decision tree: every table
    /// entry is the singleton `{ evaluate(tree, x) }`.
    pub fn from_tree(
        tree: &DecisionTree,
        arity: usize,
        input: Alphabet,
        output: Alphabet,
    ) -> Result<Self, RelationError> {
        tree.validate(arity, input, output)?;
        let mut rel = Self::empty(arity, input, output)?;
        let mut point = vec![0usize; arity];
        for idx in 0..rel.table.len() {
            rel.point_into(idx, &mut point);
            let y = tree
                .evaluate(&point)
                .expect("validated tree evaluates every point");
            rel.table[idx] = 1 << y;
        }
        Ok(rel)
    }

    /// The total-function relation of a pointwise map.
    pub fn from_total_fn(
        arity: usize,
        input: Alphabet,
        output: Alphabet,
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<Self, RelationError> {
        let mut rel = Self::empty(arity, input, output)?;
        let mut point = vec![0usize; arity];
        for idx in 0..rel.table.len() {
            rel.point_into(idx, &mut point);
            let y = f(&point);
            if !output.contains(y) {
                return Err(RelationError::SymbolOutOfRange {
                    symbol: y,
                    alphabet_size: output.size(),
                });
            }
            rel.table[idx] = 1 << y;
        }
        Ok(rel)
    }

    /// Adds the pair `(x, y)`.
    pub fn insert(&mut self, x: &[usize], y: usize) -> Result<(), RelationError> {
        let idx = self.index_of(x)?;
        if !self.output.contains(y) {
            return Err(RelationError::SymbolOutOfRange {
                symbol: y,
                alphabet_size: self.output.size(),
            });
        }
        self.table[idx] |= 1 << y;
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn input_alphabet(&self) -> Alphabet {
        self.input
    }

    pub fn output_alphabet(&self) -> Alphabet {
        self.output
    }

    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    /// Output mask at a raw table index. Panics if out of range.
    pub fn entry(&self, index: usize) -> u64 {
        self.table[index]
    }

    /// Output mask at an input point.
    pub fn outputs(&self, x: &[usize]) -> Result<u64, RelationError> {
        Ok(self.table[self.index_of(x)?])
    }

    pub fn full_output_mask(&self) -> u64 {
        if self.output.size() == MAX_OUTPUT_SYMBOLS {
            u64::MAX
        } else {
            (1u64 << self.output.size()) - 1
        }
    }

    /// Mixed-radix index of a point, variable 0 most significant.
    pub fn index_of(&self, x: &[usize]) -> Result<usize, RelationError> {
        if x.len() != self.arity {
            return Err(RelationError::ArityMismatch {
                got: x.len(),
                expected: self.arity,
            });
        }
        let mut idx = 0usize;
        for &s in x {
            if !self.input.contains(s) {
                return Err(RelationError::SymbolOutOfRange {
                    symbol: s,
                    alphabet_size: self.input.size(),
                });
            }
            idx = idx * self.input.size() + s;
        }
        Ok(idx)
    }

    /// Inverse of [`Relation::index_of`].
    pub fn point_of(&self, index: usize) -> Vec<usize> {
        let mut point = vec![0usize; self.arity];
        self.point_into(index, &mut point);
        point
    }

    /// Decodes a table index into a caller-provided buffer of length `arity`.
    pub fn point_into(&self, mut index: usize, out: &mut [usize]) {
        assert_eq!(out.len(), self.arity);
        for slot in out.iter_mut().rev() {
            *slot = index % self.input.size();
            index /= self.input.size();
        }
    }

    /// Iterates over `(index, output mask)` for the points of `dom f`.
    pub fn domain_entries(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0)
            .map(|(i, &m)| (i, m))
    }

    pub fn domain_size(&self) -> usize {
        self.table.iter().filter(|&&m| m != 0).count()
    }

    pub fn domain_is_empty(&self) -> bool {
        self.table.iter().all(|&m| m == 0)
    }

    /// The restriction `f_{i←b}`: pairs of `f` whose `i`'th input is `b`.
    /// The variable is kept in place (entries elsewhere are emptied), not
    /// projected out.
    pub fn restrict(&self, variable: usize, symbol: usize) -> Result<Relation, RelationError> {
        if variable >= self.arity {
            return Err(RelationError::VariableOutOfRange {
                index: variable,
                arity: self.arity,
            });
        }
        if !self.input.contains(symbol) {
            return Err(RelationError::SymbolOutOfRange {
                symbol,
                alphabet_size: self.input.size(),
            });
        }
        let base = self.input.size();
        let stride = base.pow((self.arity - 1 - variable) as u32);
        let block = stride * base;
        let mut table = vec![0u64; self.table.len()];
        let mut start = 0;
        while start < table.len() {
            let lo = start + symbol * stride;
            table[lo..lo + stride].copy_from_slice(&self.table[lo..lo + stride]);
            start += block;
        }
        Ok(Relation {
            arity: self.arity,
            input: self.input,
            output: self.output,
            table,
        })
    }

    /// Intersection of the output sets over `dom f`; the full output mask
    /// when the domain is empty.
    pub fn common_outputs(&self) -> u64 {
        let mut acc = self.full_output_mask();
        for &m in &self.table {
            if m != 0 {
                acc &= m;
                if acc == 0 {
                    return 0;
                }
            }
        }
        acc
    }

    /// True when some single output is allowed at every point of `dom f`.
    /// The empty relation is constant.
    pub fn is_constant(&self) -> bool {
        self.common_outputs() != 0
    }

    /// True when every output is allowed at every point of `dom f`. The
    /// empty relation is trivial; trivial relations are constant.
    pub fn is_trivial(&self) -> bool {
        let full = self.full_output_mask();
        self.table.iter().all(|&m| m == 0 || m == full)
    }

    /// Variables on which two points of `dom f` differ, ascending.
    ///
    /// These are the only variables the solver's recurrence needs to branch
    /// on: restricting any other variable either returns `f` itself or the
    /// empty relation.
    pub fn live_variables(&self) -> Vec<usize> {
        let base = self.input.size();
        let mut first_seen: Vec<Option<usize>> = vec![None; self.arity];
        let mut live = vec![false; self.arity];
        let mut live_count = 0;
        let mut point = vec![0usize; self.arity];
        for (idx, &m) in self.table.iter().enumerate() {
            if m == 0 || base == 1 {
                continue;
            }
            self.point_into(idx, &mut point);
            for (var, &digit) in point.iter().enumerate() {
                if live[var] {
                    continue;
                }
                match first_seen[var] {
                    None => first_seen[var] = Some(digit),
                    Some(d) if d != digit => {
                        live[var] = true;
                        live_count += 1;
                    }
                    _ => {}
                }
            }
            if live_count == self.arity {
                break;
            }
        }
        live.iter()
            .enumerate()
            .filter(|(_, &l)| l)
            .map(|(v, _)| v)
            .collect()
    }

    /// Digest over `(arity, |X|, |Y|, table words)`.
    pub fn canonical_key(&self) -> CanonicalKey {
        let mut hasher = Sha256::new();
        hasher.update((self.arity as u64).to_le_bytes());
        hasher.update((self.input.size() as u64).to_le_bytes());
        hasher.update((self.output.size() as u64).to_le_bytes());
        let mut buf = [0u8; 64 * 8];
        for chunk in self.table.chunks(64) {
            for (i, &w) in chunk.iter().enumerate() {
                buf[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
            }
            hasher.update(&buf[..chunk.len() * 8]);
        }
        CanonicalKey(hasher.finalize().into())
    }
}

fn check_composition_shapes(
    outer: &Relation,
    inners: &[Relation],
) -> Result<Alphabet, RelationError> {
    if outer.arity() != inners.len() {
        return Err(RelationError::CompositionArityMismatch {
            outer_arity: outer.arity(),
            inner_count: inners.len(),
        });
    }
    let input = inners
        .first()
        .map(|f| f.input_alphabet())
        .unwrap_or_else(|| outer.input_alphabet());
    for (i, f) in inners.iter().enumerate() {
        if f.input_alphabet() != input {
            return Err(RelationError::InputAlphabetMismatch(
                input.size(),
                f.input_alphabet().size(),
            ));
        }
        if f.output_alphabet() != outer.input_alphabet() {
            return Err(RelationError::IntermediateAlphabetMismatch {
                index: i,
                got: f.output_alphabet().size(),
                expected: outer.input_alphabet().size(),
            });
        }
    }
    Ok(input)
}

/// Splits a table index of the composed relation into per-block indices.
/// Block 0 occupies the most significant mixed-radix digits.
fn split_blocks(mut index: usize, block_lens: &[usize], out: &mut [usize]) {
    for (slot, &len) in out.iter_mut().zip(block_lens.iter()).rev() {
        *slot = index % len;
        index /= len;
    }
}

/// The composition `g ∘ (f¹, …, fⁿ)`: `x` relates to `z` whenever some
/// intermediate `y ∈ Yⁿ` has `y_i` allowed by `fs[i]` on the `i`'th block
/// of `x` and `z` allowed by `g` on `y`.
///
/// Blocks follow declaration order, block 0 most significant. Built by full
/// enumeration of the composed input space and the feasible `y`.
pub fn compose(
    outer: &Relation,
    inners: &[Relation],
    max_table_bits: u32,
) -> Result<Relation, RelationError> {
    let input = check_composition_shapes(outer, inners)?;
    let arity = inners.iter().map(|f| f.arity()).sum();
    let mut composed =
        Relation::empty_with_limit(arity, input, outer.output_alphabet(), max_table_bits)?;

    let n = inners.len();
    let y_size = outer.input_alphabet().size();
    let full = composed.full_output_mask();
    let block_lens: Vec<usize> = inners.iter().map(|f| f.table_len()).collect();
    let mut blocks = vec![0usize; n];
    let mut symbols: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut digits = vec![0usize; n];

    for idx in 0..composed.table.len() {
        split_blocks(idx, &block_lens, &mut blocks);
        let mut feasible = true;
        for i in 0..n {
            symbols[i].clear();
            let mask = inners[i].entry(blocks[i]);
            if mask == 0 {
                feasible = false;
                break;
            }
            let mut m = mask;
            while m != 0 {
                symbols[i].push(m.trailing_zeros() as usize);
                m &= m - 1;
            }
        }
        if !feasible {
            continue;
        }
        let mut acc = 0u64;
        digits.iter_mut().for_each(|d| *d = 0);
        'odometer: loop {
            let mut y_index = 0usize;
            for i in 0..n {
                y_index = y_index * y_size + symbols[i][digits[i]];
            }
            acc |= outer.entry(y_index);
            if acc == full {
                break;
            }
            let mut i = n;
            loop {
                if i == 0 {
                    break 'odometer;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < symbols[i].len() {
                    break;
                }
                digits[i] = 0;
            }
        }
        composed.table[idx] = acc;
    }
    Ok(composed)
}

/// The constant-substituted outer relation `ḡ`.
///
/// With `S` the set of indices whose inner relation is not constant, `ḡ`
/// keeps exactly the pairs of `g` whose coordinate `i ∉ S` equals the
/// constant value `b_i` of `fs[i]`. Arity and alphabets are unchanged; the
/// fixed coordinates stay in place with the domain restricted.
///
/// Every `fs[i]` must be non-trivial. A boolean-valued non-trivial constant
/// relation has exactly one valid-everywhere output; for larger output
/// alphabets there may be several, in which case the smallest is taken.
pub fn substitute_constants(
    outer: &Relation,
    inners: &[Relation],
) -> Result<Relation, RelationError> {
    check_composition_shapes(outer, inners)?;
    let mut fixed: Vec<Option<usize>> = Vec::with_capacity(inners.len());
    for (i, f) in inners.iter().enumerate() {
        if f.is_trivial() {
            return Err(RelationError::TrivialInner(i));
        }
        let common = f.common_outputs();
        fixed.push((common != 0).then(|| common.trailing_zeros() as usize));
    }
    if fixed.iter().all(Option::is_none) {
        return Ok(outer.clone());
    }
    let mut result = outer.clone();
    let mut point = vec![0usize; outer.arity()];
    for idx in 0..result.table.len() {
        if result.table[idx] == 0 {
            continue;
        }
        result.point_into(idx, &mut point);
        let keep = point
            .iter()
            .zip(fixed.iter())
            .all(|(&digit, f)| f.is_none_or(|b| digit == b));
        if !keep {
            result.table[idx] = 0;
        }
    }
    Ok(result)
}

/// The `k`-fold self-composition `f⁽ᵏ⁾` of a total boolean function:
/// `f⁽¹⁾ = f` and `f⁽ᵏ⁾ = f ∘ (f⁽ᵏ⁻¹⁾, …, f⁽ᵏ⁻¹⁾)` with `arity(f)` copies.
pub fn iterate(f: &Relation, k: u32, max_table_bits: u32) -> Result<Relation, RelationError> {
    if k == 0 {
        return Err(RelationError::ZeroIterations);
    }
    let boolean = Alphabet::binary();
    let total_boolean = f.input_alphabet() == boolean
        && f.output_alphabet() == boolean
        && f.table.iter().all(|m| m.count_ones() == 1);
    if !total_boolean {
        return Err(RelationError::NotTotalBoolean);
    }
    // Validate the final arity up front so partial work is never done.
    let mut final_arity: u128 = 1;
    for _ in 0..k {
        final_arity = final_arity
            .checked_mul(f.arity() as u128)
            .filter(|&a| a <= max_table_bits as u128)
            .ok_or(RelationError::TableTooLarge {
                base: 2,
                arity: usize::MAX,
                max_bits: max_table_bits,
            })?;
    }
    let mut acc = f.clone();
    for _ in 1..k {
        let copies = vec![acc; f.arity()];
        acc = compose(f, &copies, max_table_bits)?;
    }
    Ok(acc)
}

/// The tupling `(f¹, …, fⁿ)` of boolean-valued relations on disjoint input
/// blocks. The output alphabet has size `2ⁿ`; coordinate `i` of the joint
/// output is stored at bit `i` of the output symbol.
pub fn tuple(inners: &[Relation], max_table_bits: u32) -> Result<Relation, RelationError> {
    let n = inners.len();
    if n > 6 {
        return Err(RelationError::OutputAlphabetTooLarge(
            1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
        ));
    }
    let input = inners
        .first()
        .map(|f| f.input_alphabet())
        .unwrap_or_else(Alphabet::binary);
    for (i, f) in inners.iter().enumerate() {
        if f.output_alphabet() != Alphabet::binary() {
            return Err(RelationError::NotBooleanValued(i));
        }
        if f.input_alphabet() != input {
            return Err(RelationError::InputAlphabetMismatch(
                input.size(),
                f.input_alphabet().size(),
            ));
        }
    }
    let arity = inners.iter().map(|f| f.arity()).sum();
    let output = Alphabet::new(1 << n)?;
    let mut joint = Relation::empty_with_limit(arity, input, output, max_table_bits)?;

    let block_lens: Vec<usize> = inners.iter().map(|f| f.table_len()).collect();
    let mut blocks = vec![0usize; n];
    for idx in 0..joint.table.len() {
        split_blocks(idx, &block_lens, &mut blocks);
        let masks: Vec<u64> = inners
            .iter()
            .zip(blocks.iter())
            .map(|(f, &b)| f.entry(b))
            .collect();
        if masks.contains(&0) {
            continue;
        }
        let mut acc = 0u64;
        for z in 0..(1u64 << n) {
            let allowed = masks
                .iter()
                .enumerate()
                .all(|(i, &m)| m & (1 << ((z >> i) & 1)) != 0);
            if allowed {
                acc |= 1 << z;
            }
        }
        joint.table[idx] = acc;
    }
    Ok(joint)
}
