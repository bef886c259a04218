//! Buyer valuations over bundles of items.
//!
//! A [`Valuation`] is a set function `v : 2^items -> Q>=0` with `v({}) = 0`,
//! held either as a dense table or in one of two structured forms whose
//! values and marginals are computed from the structure directly.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::ValuationError;
use crate::itemset::{ItemSet, MAX_ITEMS};
use crate::rational::Rational;

/// Size-to-value curve shared by all groups of an additive-groups valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Curve {
    /// `l(t) = 1 + 1/2 + ... + 1/t`, `l(0) = 0`.
    Harmonic,
    /// `l(t) = values[t]`; `values[0]` must be 0.
    Explicit(Vec<Rational>),
}

impl Curve {
    /// Curve points `l(0..=max_size)`.
    fn points(&self, max_size: usize) -> Result<Vec<Rational>, ValuationError> {
        match self {
            Curve::Harmonic => {
                let mut points = Vec::with_capacity(max_size + 1);
                let mut acc = Rational::zero();
                points.push(acc.clone());
                for t in 1..=max_size {
                    acc += Rational::new(1, t as i64);
                    points.push(acc.clone());
                }
                Ok(points)
            }
            Curve::Explicit(values) => {
                if values.len() <= max_size {
                    return Err(ValuationError::CurveTooShort {
                        have: values.len(),
                        need: max_size,
                    });
                }
                if let Some(first) = values.first() {
                    if !first.is_zero() {
                        return Err(ValuationError::CurveOrigin(first.to_string()));
                    }
                }
                Ok(values[..=max_size].to_vec())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum ValuationKind {
    /// Dense table indexed by bundle bitmask.
    Table { values: Vec<Rational> },
    /// `v(T) = sum_g l(|T ∩ g|)` over a partition of the items into groups.
    AdditiveGroups {
        groups: Vec<ItemSet>,
        group_of: Vec<usize>,
        curve: Curve,
        points: Vec<Rational>,
    },
    /// `v(S) = sum_c max_{a in S ∩ c} value(a)` over a partition into
    /// categories; the max over an empty set is 0.
    CategoryMax {
        categories: Vec<ItemSet>,
        category_of: Vec<usize>,
        item_values: Vec<Rational>,
    },
}

/// Counterexample produced by an exhaustive property check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum Witness {
    /// `m_item(set) < 0`.
    Monotone {
        set: ItemSet,
        item: usize,
        marginal: Rational,
    },
    /// `smaller ⊆ larger`, `item ∉ larger`, `m_item(smaller) < m_item(larger)`.
    Submodular {
        smaller: ItemSet,
        larger: ItemSet,
        item: usize,
        marginal_smaller: Rational,
        marginal_larger: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "UPPERCASE")]
pub enum ValidationReport {
    Pass,
    Fail(Witness),
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        matches!(self, ValidationReport::Pass)
    }
}

#[derive(Clone, Debug)]
pub struct Valuation {
    names: Vec<String>,
    kind: ValuationKind,
    monotone: OnceLock<ValidationReport>,
    submodular: OnceLock<ValidationReport>,
}

fn check_names(names: &[String]) -> Result<(), ValuationError> {
    if names.len() > MAX_ITEMS {
        return Err(ValuationError::TooManyItems(names.len()));
    }
    let mut seen = HashSet::new();
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(ValuationError::DuplicateItem(name.clone()));
        }
    }
    Ok(())
}

/// Verifies that `parts` partition `{0..n}` and returns the part index of
/// every item.
fn partition_index(parts: &[ItemSet], n: usize, what: &str) -> Result<Vec<usize>, ValuationError> {
    let universe = ItemSet::full(n);
    let mut owner = vec![usize::MAX; n];
    for (g, part) in parts.iter().enumerate() {
        if !part.is_subset(universe) {
            return Err(ValuationError::InvalidPartition(format!(
                "{what} {g} names items outside the universe"
            )));
        }
        for item in part.iter() {
            if owner[item] != usize::MAX {
                return Err(ValuationError::InvalidPartition(format!(
                    "item {item} belongs to {what}s {} and {g}",
                    owner[item]
                )));
            }
            owner[item] = g;
        }
    }
    if let Some(item) = owner.iter().position(|&g| g == usize::MAX) {
        return Err(ValuationError::InvalidPartition(format!(
            "item {item} is in no {what}"
        )));
    }
    Ok(owner)
}

impl Valuation {
    /// Dense table; `values[mask]` is the value of the bundle `mask`.
    pub fn table(names: Vec<String>, values: Vec<Rational>) -> Result<Self, ValuationError> {
        check_names(&names)?;
        let n = names.len();
        if values.len() != 1 << n {
            return Err(ValuationError::MissingEntry(format!(
                "table has {} entries, expected {}",
                values.len(),
                1u64 << n
            )));
        }
        if !values[0].is_zero() {
            return Err(ValuationError::NonzeroEmpty(values[0].to_string()));
        }
        if let Some(mask) = values.iter().position(Rational::is_negative) {
            return Err(ValuationError::NegativeValue {
                set: ItemSet::from_bits(mask as u32).display(&names).to_string(),
                value: values[mask].to_string(),
            });
        }
        Ok(Self::with_kind(names, ValuationKind::Table { values }))
    }

    pub fn additive_groups(
        names: Vec<String>,
        groups: Vec<ItemSet>,
        curve: Curve,
    ) -> Result<Self, ValuationError> {
        check_names(&names)?;
        let group_of = partition_index(&groups, names.len(), "group")?;
        let max_size = groups.iter().map(|g| g.len()).max().unwrap_or(0);
        let points = curve.points(max_size)?;
        if let Some(t) = points.iter().position(Rational::is_negative) {
            return Err(ValuationError::NegativeValue {
                set: format!("of size {t}"),
                value: points[t].to_string(),
            });
        }
        Ok(Self::with_kind(
            names,
            ValuationKind::AdditiveGroups {
                groups,
                group_of,
                curve,
                points,
            },
        ))
    }

    pub fn category_max(
        names: Vec<String>,
        categories: Vec<ItemSet>,
        item_values: Vec<Rational>,
    ) -> Result<Self, ValuationError> {
        check_names(&names)?;
        let category_of = partition_index(&categories, names.len(), "category")?;
        if item_values.len() != names.len() {
            return Err(ValuationError::MissingEntry(format!(
                "{} item values for {} items",
                item_values.len(),
                names.len()
            )));
        }
        if let Some(i) = item_values.iter().position(Rational::is_negative) {
            return Err(ValuationError::NegativeValue {
                set: format!("{{{}}}", names[i]),
                value: item_values[i].to_string(),
            });
        }
        Ok(Self::with_kind(
            names,
            ValuationKind::CategoryMax {
                categories,
                category_of,
                item_values,
            },
        ))
    }

    fn with_kind(names: Vec<String>, kind: ValuationKind) -> Self {
        Valuation {
            names,
            kind,
            monotone: OnceLock::new(),
            submodular: OnceLock::new(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn universe(&self) -> ItemSet {
        ItemSet::full(self.n())
    }

    pub fn kind(&self) -> &ValuationKind {
        &self.kind
    }

    pub fn item_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn check_within(&self, s: ItemSet) -> Result<(), ValuationError> {
        if s.is_subset(self.universe()) {
            Ok(())
        } else {
            Err(ValuationError::OutOfUniverse {
                set: s.bits(),
                n: self.n(),
            })
        }
    }

    /// `v(S)`.
    pub fn value(&self, s: ItemSet) -> Result<Rational, ValuationError> {
        self.check_within(s)?;
        Ok(self.eval(s))
    }

    /// `v(S)` for a set already known to lie inside the universe.
    ///
    /// Structured kinds are evaluated from their structure, never from an
    /// expanded table.
    pub fn eval(&self, s: ItemSet) -> Rational {
        debug_assert!(s.is_subset(self.universe()));
        match &self.kind {
            ValuationKind::Table { values } => values[s.bits() as usize].clone(),
            ValuationKind::AdditiveGroups { groups, points, .. } => groups
                .iter()
                .map(|g| &points[s.intersection(*g).len()])
                .sum(),
            ValuationKind::CategoryMax {
                categories,
                item_values,
                ..
            } => categories
                .iter()
                .filter_map(|c| {
                    s.intersection(*c)
                        .iter()
                        .map(|i| &item_values[i])
                        .max()
                })
                .sum(),
        }
    }

    /// `m_a(S) = v(S ∪ {a}) - v(S)`, for `a ∉ S`.
    pub fn marginal(&self, item: usize, s: ItemSet) -> Result<Rational, ValuationError> {
        self.check_within(s)?;
        if item >= self.n() {
            return Err(ValuationError::OutOfUniverse {
                set: 1 << item.min(31),
                n: self.n(),
            });
        }
        if s.contains(item) {
            return Err(ValuationError::ItemInSet { item });
        }
        Ok(self.marginal_of(item, s))
    }

    /// Unchecked `m_a(S)`; `a` may also belong to `S`, in which case this is
    /// `m_a(S \ {a})`.
    pub fn marginal_of(&self, item: usize, s: ItemSet) -> Rational {
        let s = s.without(item);
        match &self.kind {
            ValuationKind::Table { values } => {
                &values[s.with(item).bits() as usize] - &values[s.bits() as usize]
            }
            ValuationKind::AdditiveGroups {
                groups,
                group_of,
                points,
                ..
            } => {
                let c = s.intersection(groups[group_of[item]]).len();
                &points[c + 1] - &points[c]
            }
            ValuationKind::CategoryMax {
                categories,
                category_of,
                item_values,
            } => {
                let best = s
                    .intersection(categories[category_of[item]])
                    .iter()
                    .map(|i| &item_values[i])
                    .max();
                match best {
                    Some(best) if best >= &item_values[item] => Rational::zero(),
                    Some(best) => &item_values[item] - best,
                    None => item_values[item].clone(),
                }
            }
        }
    }

    /// Exhaustive monotonicity check over every `(S, a ∉ S)`; the first
    /// violation in increasing `(S, a)` order is returned as the witness.
    pub fn check_monotone(&self) -> ValidationReport {
        self.monotone
            .get_or_init(|| self.scan_monotone())
            .clone()
    }

    fn scan_monotone(&self) -> ValidationReport {
        let universe = self.universe();
        for s in universe.subsets() {
            let vs = self.eval(s);
            for a in universe.difference(s).iter() {
                let m = self.eval(s.with(a)) - &vs;
                if m.is_negative() {
                    return ValidationReport::Fail(Witness::Monotone {
                        set: s,
                        item: a,
                        marginal: m,
                    });
                }
            }
        }
        ValidationReport::Pass
    }

    /// Exhaustive submodularity check.
    ///
    /// Only adjacent pairs `S ⊂ S ∪ {b}` are scanned: if
    /// `m_a(S) >= m_a(S ∪ {b})` for every `S`, `a` and `b`, chaining the
    /// inequality along any path from `S` up to a superset `T` gives
    /// `m_a(S) >= m_a(T)`. The first violation in increasing `(S, a, b)`
    /// order is returned.
    pub fn check_submodular(&self) -> ValidationReport {
        self.submodular
            .get_or_init(|| self.scan_submodular())
            .clone()
    }

    fn scan_submodular(&self) -> ValidationReport {
        let universe = self.universe();
        let n = self.n();
        let table: Vec<Rational> = match &self.kind {
            ValuationKind::Table { values } => values.clone(),
            _ => (0..1u32 << n).map(|m| self.eval(ItemSet::from_bits(m))).collect(),
        };
        let v = |s: ItemSet| &table[s.bits() as usize];
        for s in universe.subsets() {
            let outside = universe.difference(s);
            for a in outside.iter() {
                let m_small = v(s.with(a)) - v(s);
                for b in outside.without(a).iter() {
                    let t = s.with(b);
                    let m_large = v(t.with(a)) - v(t);
                    if m_small < m_large {
                        return ValidationReport::Fail(Witness::Submodular {
                            smaller: s,
                            larger: t,
                            item: a,
                            marginal_smaller: m_small,
                            marginal_larger: m_large,
                        });
                    }
                }
            }
        }
        ValidationReport::Pass
    }

    /// Decides monotonicity and submodularity together.
    ///
    /// Structured kinds are decided from their structure: an additive-groups
    /// valuation is monotone and submodular exactly when its curve is
    /// nondecreasing and has nonincreasing increments; a category-max
    /// valuation always is. Tables fall back to the exhaustive scans.
    pub fn is_monotone_submodular(&self) -> bool {
        match &self.kind {
            ValuationKind::Table { .. } => {
                self.check_monotone().passed() && self.check_submodular().passed()
            }
            ValuationKind::AdditiveGroups { points, .. } => {
                let steps: Vec<Rational> = points.windows(2).map(|w| &w[1] - &w[0]).collect();
                steps.iter().all(|d| !d.is_negative()) && steps.windows(2).all(|w| w[0] >= w[1])
            }
            ValuationKind::CategoryMax { .. } => true,
        }
    }

    /// Dense-table copy of this valuation.
    pub fn to_table(&self) -> Valuation {
        let values = (0..1u32 << self.n())
            .map(|m| self.eval(ItemSet::from_bits(m)))
            .collect();
        Valuation::table(self.names.clone(), values).expect("structured valuation is normalized")
    }

    /// `v(A*)`.
    pub fn grand_value(&self) -> Rational {
        self.eval(self.universe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn harmonic_group_value() {
        let v = Valuation::additive_groups(
            names(&["x1", "x2", "x3"]),
            vec![ItemSet::full(3)],
            Curve::Harmonic,
        )
        .unwrap();
        assert_eq!(v.value(ItemSet::from_items([0, 2])).unwrap(), Rational::new(3, 2));
        assert_eq!(v.value(ItemSet::EMPTY).unwrap(), Rational::zero());
        assert_eq!(v.grand_value(), Rational::new(11, 6));
        assert!(v.check_submodular().passed());
        assert!(v.is_monotone_submodular());
    }

    #[test]
    fn monotone_failure_witness() {
        // v({}) = 0, v({x}) = 1, v({y}) = 0, v({x,y}) = 1/2
        let v = Valuation::table(
            names(&["x", "y"]),
            vec![r("0"), r("1"), r("0"), r("1/2")],
        )
        .unwrap();
        assert_eq!(
            v.check_monotone(),
            ValidationReport::Fail(Witness::Monotone {
                set: ItemSet::singleton(0),
                item: 1,
                marginal: r("-1/2"),
            })
        );
        assert!(!v.is_monotone_submodular());
    }

    #[test]
    fn supermodular_pair_witness() {
        let v = Valuation::table(names(&["x", "y"]), vec![r("0"), r("1"), r("1"), r("3")]).unwrap();
        assert!(v.check_monotone().passed());
        assert_eq!(
            v.check_submodular(),
            ValidationReport::Fail(Witness::Submodular {
                smaller: ItemSet::EMPTY,
                larger: ItemSet::singleton(1),
                item: 0,
                marginal_smaller: r("1"),
                marginal_larger: r("2"),
            })
        );
    }

    #[test]
    fn category_max_is_always_sound() {
        let v = Valuation::category_max(
            names(&["x", "y", "z"]),
            vec![ItemSet::from_items([0, 1]), ItemSet::singleton(2)],
            vec![r("10"), r("8"), r("3")],
        )
        .unwrap();
        assert_eq!(v.value(ItemSet::from_items([0, 1])).unwrap(), r("10"));
        assert_eq!(v.value(ItemSet::from_items([1, 2])).unwrap(), r("11"));
        assert_eq!(v.marginal(0, ItemSet::singleton(1)).unwrap(), r("2"));
        assert_eq!(v.marginal(1, ItemSet::singleton(0)).unwrap(), r("0"));
        assert!(v.scan_monotone().passed());
        assert!(v.scan_submodular().passed());
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Valuation::table(names(&["x"]), vec![r("1"), r("2")]),
            Err(ValuationError::NonzeroEmpty(_))
        ));
        assert!(matches!(
            Valuation::table(names(&["x"]), vec![r("0"), r("-2")]),
            Err(ValuationError::NegativeValue { .. })
        ));
        assert!(matches!(
            Valuation::table(names(&["x", "x"]), vec![r("0"); 4]),
            Err(ValuationError::DuplicateItem(_))
        ));
        assert!(matches!(
            Valuation::additive_groups(
                names(&["x", "y"]),
                vec![ItemSet::singleton(0)],
                Curve::Harmonic
            ),
            Err(ValuationError::InvalidPartition(_))
        ));
        assert!(matches!(
            Valuation::additive_groups(
                names(&["x", "y"]),
                vec![ItemSet::full(2)],
                Curve::Explicit(vec![r("0"), r("1")])
            ),
            Err(ValuationError::CurveTooShort { .. })
        ));
        let v = Valuation::table(names(&["x"]), vec![r("0"), r("2")]).unwrap();
        assert!(matches!(v.value(ItemSet::singleton(3)), Err(ValuationError::OutOfUniverse { .. })));
        assert!(matches!(v.marginal(0, ItemSet::singleton(0)), Err(ValuationError::ItemInSet { item: 0 })));
    }

    fn arb_curve() -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-3i64..8, 1..5)
    }

    fn arb_groups(n: usize) -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::vec(0..3usize, n)
    }

    fn group_valuation(steps: &[i64], labels: &[usize]) -> Option<Valuation> {
        let n = labels.len();
        let mut points = vec![Rational::zero()];
        for s in steps {
            let last = points.last().unwrap().clone();
            points.push(last + Rational::new(*s, 2));
        }
        let mut groups = vec![ItemSet::EMPTY; 3];
        for (i, &g) in labels.iter().enumerate() {
            groups[g] = groups[g].with(i);
        }
        groups.retain(|g| !g.is_empty());
        let names = (0..n).map(|i| format!("i{i}")).collect();
        Valuation::additive_groups(names, groups, Curve::Explicit(points)).ok()
    }

    proptest! {
        #[test]
        fn structured_equals_table(steps in arb_curve(), labels in arb_groups(4)) {
            if let Some(v) = group_valuation(&steps, &labels) {
                let t = v.to_table();
                for s in v.universe().subsets() {
                    prop_assert_eq!(v.eval(s), t.eval(s));
                    for a in v.universe().difference(s).iter() {
                        prop_assert_eq!(v.marginal_of(a, s), t.marginal_of(a, s));
                    }
                }
            }
        }

        #[test]
        fn structural_verdict_matches_exhaustive(steps in arb_curve(), labels in arb_groups(5)) {
            if let Some(v) = group_valuation(&steps, &labels) {
                let exhaustive = v.scan_monotone().passed() && v.scan_submodular().passed();
                prop_assert_eq!(v.is_monotone_submodular(), exhaustive);
            }
        }

        #[test]
        fn category_max_equals_table(values in proptest::collection::vec(0i64..20, 5), cats in arb_groups(5)) {
            let mut categories = vec![ItemSet::EMPTY; 3];
            for (i, &c) in cats.iter().enumerate() {
                categories[c] = categories[c].with(i);
            }
            categories.retain(|c| !c.is_empty());
            let v = Valuation::category_max(
                (0..5).map(|i| format!("i{i}")).collect(),
                categories,
                values.into_iter().map(Rational::from_integer).collect(),
            ).unwrap();
            let t = v.to_table();
            for s in v.universe().subsets() {
                prop_assert_eq!(v.eval(s), t.eval(s));
                for a in v.universe().difference(s).iter() {
                    prop_assert_eq!(v.marginal_of(a, s), t.marginal_of(a, s));
                }
            }
            prop_assert!(t.check_submodular().passed());
        }
    }
}
