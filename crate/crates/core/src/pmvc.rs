//! The price-moderated game: vendors only choose which of their items to
//! offer, and a mechanism prices every offered item at its marginal value to
//! the full offered set.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::GameError;
use crate::itemset::{parse_named_set, ItemSet};
use crate::market::{demand, unavailable_price, PriceVector};
use crate::rational::Rational;
use crate::valuation::Valuation;

/// Default cap on the number of strategy profiles enumerated.
pub const DEFAULT_PROFILE_CAP: u64 = 1 << 20;

/// Items, the vendors' disjoint item sets, and the buyer's valuation.
#[derive(Clone, Debug)]
pub struct GameInstance {
    valuation: Valuation,
    vendors: Vec<ItemSet>,
    certified: bool,
    sentinel: Rational,
}

impl GameInstance {
    /// Builds a game whose valuation is verified monotone and submodular.
    pub fn new(valuation: Valuation, vendors: Vec<ItemSet>) -> Result<Self, GameError> {
        let g = Self::diagnostic(valuation, vendors)?;
        if !g.certified {
            return Err(GameError::NotCertified("monotone and submodular"));
        }
        Ok(g)
    }

    /// Builds a game without requiring a sound valuation. Analyses still run
    /// (the buyer falls back to a maximal optimum when optima are not
    /// union-closed) but no theorem-backed shortcut is taken.
    pub fn diagnostic(valuation: Valuation, vendors: Vec<ItemSet>) -> Result<Self, GameError> {
        if vendors.is_empty() {
            return Err(GameError::NoVendors);
        }
        let universe = valuation.universe();
        let mut seen = ItemSet::EMPTY;
        for (i, a) in vendors.iter().enumerate() {
            if !a.is_subset(universe) {
                return Err(GameError::BadVendorPartition(format!(
                    "vendor {i} owns items outside the universe"
                )));
            }
            if !a.is_disjoint(seen) {
                return Err(GameError::BadVendorPartition(format!(
                    "vendor {i} shares items with an earlier vendor"
                )));
            }
            seen = seen.union(*a);
        }
        if seen != universe {
            return Err(GameError::BadVendorPartition(
                "some items have no vendor".to_string(),
            ));
        }
        let certified = valuation.is_monotone_submodular();
        let sentinel = unavailable_price(&valuation);
        Ok(GameInstance {
            valuation,
            vendors,
            certified,
            sentinel,
        })
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn vendors(&self) -> &[ItemSet] {
        &self.vendors
    }

    pub fn vendor_items(&self, i: usize) -> Result<ItemSet, GameError> {
        self.vendors.get(i).copied().ok_or(GameError::NoSuchVendor(i))
    }

    pub fn k(&self) -> usize {
        self.vendors.len()
    }

    pub fn n(&self) -> usize {
        self.valuation.n()
    }

    pub fn names(&self) -> &[String] {
        self.valuation.names()
    }

    pub fn universe(&self) -> ItemSet {
        self.valuation.universe()
    }

    /// Whether the valuation was verified monotone and submodular.
    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// `v(A*) + 1`, the price of an item nobody offers.
    pub fn sentinel(&self) -> &Rational {
        &self.sentinel
    }

    pub fn vendor_of(&self, item: usize) -> Option<usize> {
        self.vendors.iter().position(|a| a.contains(item))
    }

    /// `max_i |A_i|`.
    pub fn max_vendor_size(&self) -> usize {
        self.vendors.iter().map(|a| a.len()).max().unwrap_or(0)
    }

    /// `prod_i 2^|A_i|`.
    pub fn profile_count(&self) -> u128 {
        1u128 << self.n()
    }

    pub fn check_prices(&self, p: &PriceVector) -> Result<(), GameError> {
        if p.len() != self.n() {
            return Err(GameError::PriceArity {
                got: p.len(),
                want: self.n(),
            });
        }
        Ok(())
    }
}

/// Offered subsets `(S_1, ..., S_k)` with `S_i ⊆ A_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<ItemSet>);

impl StrategyProfile {
    pub fn new(g: &GameInstance, offered: Vec<ItemSet>) -> Result<Self, GameError> {
        if offered.len() != g.k() {
            return Err(GameError::ProfileArity {
                got: offered.len(),
                want: g.k(),
            });
        }
        for (i, (s, a)) in offered.iter().zip(g.vendors()).enumerate() {
            if !s.is_subset(*a) {
                return Err(GameError::ForeignItems { vendor: i });
            }
        }
        Ok(StrategyProfile(offered))
    }

    /// Everybody offers nothing.
    pub fn empty(g: &GameInstance) -> Self {
        StrategyProfile(vec![ItemSet::EMPTY; g.k()])
    }

    /// Everybody offers everything.
    pub fn full(g: &GameInstance) -> Self {
        StrategyProfile(g.vendors().to_vec())
    }

    /// `{a}|{c,d}` style, one set per vendor.
    pub fn parse(g: &GameInstance, text: &str) -> Result<Self, GameError> {
        let sets = text
            .split('|')
            .map(|part| parse_named_set(part, g.names()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(g, sets)
    }

    pub fn offered(&self, i: usize) -> ItemSet {
        self.0[i]
    }

    pub fn sets(&self) -> &[ItemSet] {
        &self.0
    }

    /// `S* = S_1 ∪ ... ∪ S_k`.
    pub fn union(&self) -> ItemSet {
        self.0.iter().fold(ItemSet::EMPTY, |acc, s| acc.union(*s))
    }

    /// Copy with vendor `i` switched to `s`.
    pub fn with(&self, i: usize, s: ItemSet) -> Self {
        let mut next = self.0.clone();
        next[i] = s;
        StrategyProfile(next)
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> ProfileDisplay<'a> {
        ProfileDisplay {
            profile: self,
            names,
        }
    }
}

pub struct ProfileDisplay<'a> {
    profile: &'a StrategyProfile,
    names: &'a [String],
}

impl fmt::Display for ProfileDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.profile.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{}", s.display(self.names))?;
        }
        Ok(())
    }
}

/// What happens once prices are fixed and the buyer has chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub prices: PriceVector,
    pub sold: ItemSet,
    pub vendor_payoffs: Vec<Rational>,
    pub buyer_utility: Rational,
    pub welfare: Rational,
}

/// Runs the buyer at prices `p` and splits the revenue among vendors.
pub fn settle(g: &GameInstance, p: PriceVector) -> Outcome {
    let d = demand(g.valuation(), &p);
    let vendor_payoffs = g
        .vendors()
        .iter()
        .map(|a| p.total(d.chosen.intersection(*a)))
        .collect();
    Outcome {
        welfare: g.valuation().eval(d.chosen),
        sold: d.chosen,
        vendor_payoffs,
        buyer_utility: d.utility,
        prices: p,
    }
}

/// How the mechanism prices offered items.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Pricing {
    /// `p(a) = m_a(S* \ a)`.
    #[default]
    Marginal,
    /// `p(a) = max(0, m_a(S* \ a) - eps)`, which makes buying everything
    /// offered strictly better for a submodular buyer, so no tie-breaking
    /// assumption is needed.
    Undercut(Rational),
}

fn check_profile(g: &GameInstance, s: &StrategyProfile) -> Result<(), GameError> {
    StrategyProfile::new(g, s.0.clone()).map(|_| ())
}

/// Mechanism prices for profile `s`: offered items at their marginal value
/// to `S*`, everything else at `v(A*) + 1`.
pub fn pmvc_prices(g: &GameInstance, s: &StrategyProfile) -> Result<PriceVector, GameError> {
    pmvc_prices_with(g, s, &Pricing::Marginal)
}

pub fn pmvc_prices_with(
    g: &GameInstance,
    s: &StrategyProfile,
    pricing: &Pricing,
) -> Result<PriceVector, GameError> {
    check_profile(g, s)?;
    if let Pricing::Undercut(eps) = pricing {
        if !eps.is_positive() {
            return Err(GameError::EpsilonOutOfRange {
                eps: eps.to_string(),
                bound: "inf".to_string(),
            });
        }
    }
    let offered = s.union();
    let v = g.valuation();
    let prices = (0..g.n())
        .map(|a| {
            if !offered.contains(a) {
                return g.sentinel().clone();
            }
            let m = v.marginal_of(a, offered);
            match pricing {
                Pricing::Marginal => m,
                Pricing::Undercut(eps) => (m - eps).max(Rational::zero()),
            }
        })
        .collect();
    PriceVector::new(prices)
}

/// Mechanism prices, buyer's choice and payoffs for profile `s`.
pub fn pmvc_outcome(g: &GameInstance, s: &StrategyProfile) -> Result<Outcome, GameError> {
    pmvc_outcome_with(g, s, &Pricing::Marginal)
}

pub fn pmvc_outcome_with(
    g: &GameInstance,
    s: &StrategyProfile,
    pricing: &Pricing,
) -> Result<Outcome, GameError> {
    Ok(settle(g, pmvc_prices_with(g, s, pricing)?))
}

/// Vendor payoffs under marginal pricing.
///
/// On a certified valuation the buyer always takes all of `S*` (dropping an
/// offered item never helps, and the union rule then picks `S*`), so payoffs
/// are `sum_{a in S_i} m_a(S* \ a)` and the demand enumeration is skipped.
/// Diagnostic instances go through the buyer.
pub fn pmvc_payoffs(g: &GameInstance, s: &StrategyProfile) -> Vec<Rational> {
    if g.is_certified() {
        let offered = s.union();
        s.sets()
            .iter()
            .map(|si| si.iter().map(|a| g.valuation().marginal_of(a, offered)).sum())
            .collect()
    } else {
        pmvc_outcome(g, s).expect("profile built for this game").vendor_payoffs
    }
}

/// Welfare under marginal pricing; `v(S*)` on certified instances.
pub fn pmvc_welfare(g: &GameInstance, s: &StrategyProfile) -> Rational {
    if g.is_certified() {
        g.valuation().eval(s.union())
    } else {
        pmvc_outcome(g, s).expect("profile built for this game").welfare
    }
}

/// Mixed-radix numbering of all profiles; vendor 1 is the most significant
/// digit and each digit is a subset index of `A_i`.
#[derive(Clone, Debug)]
pub struct ProfileSpace {
    vendors: Vec<ItemSet>,
    strides: Vec<u64>,
    count: u64,
}

impl ProfileSpace {
    pub fn new(g: &GameInstance, cap: u64) -> Result<Self, GameError> {
        let count = g.profile_count();
        if count > cap as u128 {
            return Err(GameError::CapExceeded { count, cap });
        }
        let vendors = g.vendors().to_vec();
        let mut strides = vec![1u64; vendors.len()];
        for i in (0..vendors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * vendors[i + 1].subset_count();
        }
        Ok(ProfileSpace {
            vendors,
            strides,
            count: count as u64,
        })
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn profile(&self, index: u64) -> StrategyProfile {
        StrategyProfile(
            self.vendors
                .iter()
                .zip(&self.strides)
                .map(|(a, &stride)| a.deposit(index / stride % a.subset_count()))
                .collect(),
        )
    }

    pub fn index(&self, s: &StrategyProfile) -> u64 {
        self.vendors
            .iter()
            .zip(&self.strides)
            .zip(s.sets())
            .map(|((a, &stride), si)| a.extract(*si) * stride)
            .sum()
    }

    fn digit(&self, index: u64, i: usize) -> u64 {
        index / self.strides[i] % self.vendors[i].subset_count()
    }
}

/// Outcome of every profile, in profile-space order.
pub fn payoff_table(g: &GameInstance, cap: u64) -> Result<Vec<(StrategyProfile, Outcome)>, GameError> {
    let space = ProfileSpace::new(g, cap)?;
    (0..space.len())
        .into_par_iter()
        .map(|idx| {
            let s = space.profile(idx);
            let out = pmvc_outcome(g, &s)?;
            Ok((s, out))
        })
        .collect()
}

/// All of vendor `i`'s offers maximizing its payoff against the other
/// vendors' offers in `others` (entry `i` of `others` is ignored), in
/// subset-index order.
pub fn pmvc_best_response(
    g: &GameInstance,
    i: usize,
    others: &StrategyProfile,
) -> Result<Vec<ItemSet>, GameError> {
    let own = g.vendor_items(i)?;
    check_profile(g, others)?;
    let mut best: Option<Rational> = None;
    let mut argmax = Vec::new();
    for si in own.subsets() {
        let payoff = pmvc_payoffs(g, &others.with(i, si)).swap_remove(i);
        match &best {
            Some(b) if payoff < *b => {}
            Some(b) if payoff == *b => argmax.push(si),
            _ => {
                best = Some(payoff);
                argmax = vec![si];
            }
        }
    }
    Ok(argmax)
}

/// Payoffs of every profile, indexed like [`ProfileSpace`].
pub fn payoff_matrix(g: &GameInstance, space: &ProfileSpace) -> Vec<Vec<Rational>> {
    (0..space.len())
        .into_par_iter()
        .map(|idx| pmvc_payoffs(g, &space.profile(idx)))
        .collect()
}

/// Every pure Nash equilibrium of the price-moderated game, by exhaustive
/// enumeration. A profile qualifies when no vendor has a strictly better
/// unilateral change of offered set.
pub fn pmvc_pure_ne(g: &GameInstance, cap: u64) -> Result<Vec<StrategyProfile>, GameError> {
    let space = ProfileSpace::new(g, cap)?;
    let payoffs = payoff_matrix(g, &space);
    let mut stable = vec![true; space.len() as usize];
    for (i, own) in g.vendors().iter().enumerate() {
        let radix = own.subset_count();
        let stride = space.strides[i];
        for base in 0..space.len() {
            if space.digit(base, i) != 0 {
                continue;
            }
            let row = || (0..radix).map(|d| (base + d * stride) as usize);
            let best = row().map(|idx| &payoffs[idx][i]).max().expect("nonempty row");
            for idx in row() {
                if payoffs[idx][i] < *best {
                    stable[idx] = false;
                }
            }
        }
    }
    Ok(stable
        .iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .map(|(idx, _)| space.profile(idx as u64))
        .collect())
}

/// Whether `s` is a pure equilibrium; returns the first vendor that can
/// strictly improve otherwise.
pub fn improving_vendor(g: &GameInstance, s: &StrategyProfile) -> Option<usize> {
    let current = pmvc_payoffs(g, s);
    (0..g.k()).find(|&i| {
        g.vendors()[i]
            .subsets()
            .any(|si| pmvc_payoffs(g, &s.with(i, si))[i] > current[i])
    })
}
