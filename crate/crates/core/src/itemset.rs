//! Items and bit-indexed item sets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ValuationError;

/// Hard cap on the size of the item universe; valuations may store a dense
/// table with `2^n` entries.
pub const MAX_ITEMS: usize = 20;

/// An item of the universe, identified by its 0-based index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Item {
    pub id: usize,
    pub name: String,
}

/// Subset of a universe of at most [`MAX_ITEMS`] items, stored as a bitmask.
///
/// Bit `j` stands for the item with id `j`. The natural order on the mask
/// (`Ord`) is the "subset index" order used throughout for deterministic
/// enumeration.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemSet(u32);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        ItemSet(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_ITEMS, "universe of {n} items exceeds cap {MAX_ITEMS}");
        ItemSet(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(item: usize) -> Self {
        debug_assert!(item < MAX_ITEMS);
        ItemSet(1 << item)
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Self {
        items.into_iter().fold(ItemSet::EMPTY, |s, i| s.with(i))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, item: usize) -> bool {
        item < 32 && self.0 & (1 << item) != 0
    }

    pub fn with(self, item: usize) -> Self {
        ItemSet(self.0 | (1 << item))
    }

    pub fn without(self, item: usize) -> Self {
        ItemSet(self.0 & !(1 << item))
    }

    pub fn union(self, other: Self) -> Self {
        ItemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        ItemSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        ItemSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Lowest item id, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Item ids in increasing order.
    pub fn iter(self) -> Items {
        Items(self.0)
    }

    /// Every subset of `self`, in increasing mask order (starts with the
    /// empty set, ends with `self`).
    pub fn subsets(self) -> Subsets {
        Subsets {
            universe: self.0,
            next: Some(0),
        }
    }

    /// Number of subsets of `self`, `2^|self|`.
    pub fn subset_count(self) -> u64 {
        1u64 << self.len()
    }

    /// The subset selected by `index` when the items of `self` are numbered
    /// in increasing order: bit `j` of `index` picks the `j`-th item.
    pub fn deposit(self, index: u64) -> Self {
        let mut out = 0u32;
        let mut rest = self.0;
        let mut j = 0;
        while rest != 0 {
            let low = rest & rest.wrapping_neg();
            if index >> j & 1 == 1 {
                out |= low;
            }
            rest ^= low;
            j += 1;
        }
        ItemSet(out)
    }

    /// Inverse of [`deposit`](Self::deposit) for subsets of `self`.
    pub fn extract(self, subset: Self) -> u64 {
        let mut out = 0u64;
        for (j, item) in self.iter().enumerate() {
            if subset.contains(item) {
                out |= 1 << j;
            }
        }
        out
    }

    /// Renders the set with item names, e.g. `{a,c}`.
    pub fn display<'a>(self, names: &'a [String]) -> NamedSet<'a> {
        NamedSet { set: self, names }
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ItemSet::from_items(iter)
    }
}

impl IntoIterator for ItemSet {
    type Item = usize;
    type IntoIter = Items;
    fn into_iter(self) -> Items {
        self.iter()
    }
}

pub struct Items(u32);

impl Iterator for Items {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(i as usize)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Items {}

/// Submask enumeration in increasing order.
pub struct Subsets {
    universe: u32,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        let cur = self.next?;
        // (cur - universe) & universe steps to the next larger submask.
        self.next = (cur != self.universe).then(|| cur.wrapping_sub(self.universe) & self.universe);
        Some(ItemSet(cur))
    }
}

pub struct NamedSet<'a> {
    set: ItemSet,
    names: &'a [String],
}

impl fmt::Display for NamedSet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.set.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            match self.names.get(i) {
                Some(name) => f.write_str(name)?,
                None => write!(f, "#{i}")?,
            }
        }
        f.write_str("}")
    }
}

/// Parses `"{a,c}"`, `"a,c"`, `"{}"` or `""` against a list of item names.
pub fn parse_named_set(text: &str, names: &[String]) -> Result<ItemSet, ValuationError> {
    let t = text.trim();
    let t = t
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .unwrap_or(t);
    let mut set = ItemSet::EMPTY;
    for part in t.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let id = names
            .iter()
            .position(|n| n == part)
            .ok_or_else(|| ValuationError::UnknownItem(part.to_string()))?;
        if set.contains(id) {
            return Err(ValuationError::DuplicateItem(part.to_string()));
        }
        set = set.with(id);
    }
    Ok(set)
}
