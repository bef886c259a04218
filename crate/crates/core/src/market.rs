//! The buyer: quasi-linear utility, demand correspondence and the maximal
//! decision rule.

use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::itemset::ItemSet;
use crate::rational::Rational;
use crate::valuation::{Valuation, ValuationKind};

/// Nonnegative per-item prices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceVector(Vec<Rational>);

impl PriceVector {
    pub fn new(prices: Vec<Rational>) -> Result<Self, GameError> {
        if let Some(item) = prices.iter().position(Rational::is_negative) {
            return Err(GameError::NegativePrice {
                item,
                price: prices[item].to_string(),
            });
        }
        Ok(PriceVector(prices))
    }

    pub fn uniform(n: usize, price: Rational) -> Self {
        assert!(!price.is_negative());
        PriceVector(vec![price; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, item: usize) -> &Rational {
        &self.0[item]
    }

    pub fn set(&mut self, item: usize, price: Rational) {
        assert!(!price.is_negative(), "negative price for item {item}");
        self.0[item] = price;
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    /// `p(S)`.
    pub fn total(&self, s: ItemSet) -> Rational {
        s.iter().map(|i| &self.0[i]).sum()
    }
}

/// The price that makes an item unbuyable: `v(A*) + 1`.
pub fn unavailable_price(v: &Valuation) -> Rational {
    v.grand_value() + Rational::one()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DemandResult {
    /// The bundle the buyer takes.
    pub chosen: ItemSet,
    /// Maximum utility.
    pub utility: Rational,
    /// Number of utility-maximizing bundles.
    pub optima_count: u64,
    /// Whether the union of all maximizers is itself a maximizer (then it is
    /// `chosen`).
    pub union_is_optimal: bool,
}

/// `u_b(S, p) = v(S) - p(S)`.
pub fn buyer_utility(v: &Valuation, p: &PriceVector, s: ItemSet) -> Rational {
    v.eval(s) - p.total(s)
}

/// An upper bound on `v` over all bundles, cheap for every kind.
pub(crate) fn value_bound(v: &Valuation) -> Rational {
    match v.kind() {
        ValuationKind::Table { values } => values.iter().max().cloned().unwrap_or_default(),
        ValuationKind::AdditiveGroups { groups, points, .. } => groups
            .iter()
            .map(|g| points[..=g.len()].iter().max().cloned().unwrap_or_default())
            .sum(),
        ValuationKind::CategoryMax { .. } => v.grand_value(),
    }
}

/// Items that can belong to some optimal bundle. An item priced above every
/// bundle value makes any bundle containing it worse than the empty one.
fn live_items(v: &Valuation, p: &PriceVector) -> ItemSet {
    let bound = value_bound(v);
    (0..v.n()).filter(|&i| p.get(i) <= &bound).collect()
}

/// Visits `(S, u_b(S))` for every bundle `S` of `live`, in increasing mask
/// order.
fn for_each_utility(v: &Valuation, p: &PriceVector, live: ItemSet, mut f: impl FnMut(ItemSet, &Rational)) {
    let count = live.subset_count() as usize;
    let items: Vec<usize> = live.iter().collect();
    let mut cost: Vec<Rational> = Vec::with_capacity(count);
    cost.push(Rational::zero());
    for idx in 1..count {
        let low = idx.trailing_zeros() as usize;
        let c = &cost[idx & (idx - 1)] + p.get(items[low]);
        cost.push(c);
    }
    for (idx, c) in cost.iter().enumerate() {
        let s = live.deposit(idx as u64);
        let u = v.eval(s) - c;
        f(s, &u);
    }
}

/// Buyer's choice at prices `p` under the maximal decision rule.
///
/// All bundles are enumerated. When the union of all maximizers is a
/// maximizer (always the case for submodular `v`) it is the unique maximal
/// optimum and is chosen. Otherwise the maximal optimum with the largest
/// bitmask is chosen and `union_is_optimal` is false.
pub fn demand(v: &Valuation, p: &PriceVector) -> DemandResult {
    assert_eq!(p.len(), v.n(), "price vector length");
    let live = live_items(v, p);
    let mut best: Option<Rational> = None;
    let mut union = ItemSet::EMPTY;
    let mut count = 0u64;
    for_each_utility(v, p, live, |s, u| match &best {
        Some(b) if u < b => {}
        Some(b) if u == b => {
            union = union.union(s);
            count += 1;
        }
        _ => {
            best = Some(u.clone());
            union = s;
            count = 1;
        }
    });
    let utility = best.expect("the empty bundle is always available");
    if buyer_utility(v, p, union) == utility {
        return DemandResult {
            chosen: union,
            utility,
            optima_count: count,
            union_is_optimal: true,
        };
    }
    let mut optima = Vec::new();
    for_each_utility(v, p, live, |s, u| {
        if *u == utility {
            optima.push(s);
        }
    });
    let chosen = optima
        .iter()
        .copied()
        .filter(|&s| !optima.iter().any(|&t| t != s && s.is_subset(t)))
        .max()
        .expect("at least one optimum");
    DemandResult {
        chosen,
        utility,
        optima_count: count,
        union_is_optimal: false,
    }
}

/// Every utility-maximizing bundle, sorted by mask.
pub fn demand_all(v: &Valuation, p: &PriceVector) -> Vec<ItemSet> {
    assert!(v.n() <= 16, "demand_all is capped at 16 items");
    let live = live_items(v, p);
    let mut best: Option<Rational> = None;
    let mut optima = Vec::new();
    for_each_utility(v, p, live, |s, u| match &best {
        Some(b) if u < b => {}
        Some(b) if u == b => optima.push(s),
        _ => {
            best = Some(u.clone());
            optima.clear();
            optima.push(s);
        }
    });
    optima
}
