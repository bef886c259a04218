//! The continuous-price game: vendors set arbitrary nonnegative prices on
//! their own items. Revenues, best responses against fixed competitor
//! prices, equilibrium verification, best-response dynamics and the bridge
//! back to the price-moderated game.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::itemset::ItemSet;
use crate::lp::{maximize, LpOutcome};
use crate::market::{value_bound, PriceVector};
use crate::pmvc::{pmvc_best_response, pmvc_outcome, pmvc_payoffs, settle, GameInstance, StrategyProfile};
use crate::rational::Rational;

/// How a vendor's best response is searched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrMethod {
    /// Price each subset `C` of own items at its marginal contributions to
    /// the bundle bought when `C` is free.
    CandidateSet,
    /// One linear program per target bundle; exact.
    #[default]
    TargetSetExact,
    /// Every assignment of own prices from the marginal-value grid.
    Grid,
}

impl BrMethod {
    pub fn is_exact(self) -> bool {
        self == BrMethod::TargetSetExact
    }
}

impl fmt::Display for BrMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BrMethod::CandidateSet => "candidate-set",
            BrMethod::TargetSetExact => "target-set-exact",
            BrMethod::Grid => "grid",
        })
    }
}

impl FromStr for BrMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "candidate" | "candidate-set" => Ok(BrMethod::CandidateSet),
            "exact" | "target-set-exact" => Ok(BrMethod::TargetSetExact),
            "grid" => Ok(BrMethod::Grid),
            other => Err(format!("unknown method {other:?} (expected candidate, exact or grid)")),
        }
    }
}

/// Default cap on grid assignments examined per best response.
pub const DEFAULT_GRID_CAP: u64 = 1 << 20;

/// Largest `|A_i| + |live competitor items|` the exact method accepts.
pub const MAX_EXACT_ITEMS: usize = 14;

/// An unattainable supremum is approached by scaling the LP prices by
/// `1 - 10^-j`; `j` starts here so reported prices sit close to it.
const APPROACH_MIN_DIGITS: u32 = 6;
const APPROACH_MAX_DIGITS: u32 = 80;

/// `sum_{a in X(v;p) ∩ A_i} p(a)`.
pub fn vendor_revenue(g: &GameInstance, p: &PriceVector, i: usize) -> Result<Rational, GameError> {
    g.check_prices(p)?;
    g.vendor_items(i)?;
    Ok(settle(g, p.clone()).vendor_payoffs.swap_remove(i))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BestResponse {
    pub vendor: usize,
    pub method: BrMethod,
    /// Full price vector: competitors unchanged, own items repriced.
    pub prices: PriceVector,
    pub revenue: Rational,
    pub sold: ItemSet,
    /// Exact method: least upper bound of the vendor's revenue over all of
    /// its price vectors. `revenue` equals it unless tie-breaking makes it
    /// unattainable, in which case `revenue` is a realized point just below.
    pub supremum: Option<Rational>,
}

impl BestResponse {
    /// Prices of the vendor's own items, by item id.
    pub fn own_prices(&self, g: &GameInstance) -> Vec<(usize, Rational)> {
        g.vendors()[self.vendor]
            .iter()
            .map(|a| (a, self.prices.get(a).clone()))
            .collect()
    }
}

struct Realized {
    prices: PriceVector,
    revenue: Rational,
    sold: ItemSet,
}

fn realize(g: &GameInstance, i: usize, prices: PriceVector) -> Realized {
    let out = settle(g, prices);
    Realized {
        revenue: out.vendor_payoffs[i].clone(),
        sold: out.sold,
        prices: out.prices,
    }
}

fn with_own(g: &GameInstance, i: usize, p: &PriceVector, own: impl Fn(usize) -> Rational) -> PriceVector {
    let mut q = p.clone();
    for a in g.vendors()[i].iter() {
        q.set(a, own(a));
    }
    q
}

fn price_out(g: &GameInstance) -> Rational {
    value_bound(g.valuation()) + Rational::one()
}

fn candidate_set(g: &GameInstance, i: usize, p: &PriceVector) -> Realized {
    let own = g.vendors()[i];
    let off = price_out(g);
    let v = g.valuation();
    let mut best: Option<Realized> = None;
    for c in own.subsets() {
        let free = with_own(g, i, p, |a| if c.contains(a) { Rational::zero() } else { off.clone() });
        let bought = settle(g, free).sold;
        let priced = with_own(g, i, p, |a| {
            if c.contains(a) && bought.contains(a) {
                v.marginal_of(a, bought)
            } else {
                off.clone()
            }
        });
        let r = realize(g, i, priced);
        if best.as_ref().is_none_or(|b| r.revenue > b.revenue) {
            best = Some(r);
        }
    }
    best.expect("at least the empty candidate")
}

/// `{m_a(S \ a) : a in S ⊆ A*} ∪ {0, v(A*) + 1}`, ascending.
pub fn price_grid(g: &GameInstance) -> Vec<Rational> {
    let v = g.valuation();
    let mut grid: BTreeSet<Rational> = g
        .universe()
        .subsets()
        .flat_map(|s| s.iter().map(move |a| v.eval(s) - v.eval(s.without(a))))
        .collect();
    grid.insert(Rational::zero());
    grid.insert(g.sentinel().clone());
    grid.into_iter().collect()
}

fn grid_search(g: &GameInstance, i: usize, p: &PriceVector, cap: u64) -> Result<Realized, GameError> {
    let own: Vec<usize> = g.vendors()[i].iter().collect();
    let grid = price_grid(g);
    let count = (grid.len() as u128).pow(own.len() as u32);
    if count > cap as u128 {
        return Err(GameError::CapExceeded { count, cap });
    }
    let best = (0..count as u64)
        .into_par_iter()
        .map(|mut idx| {
            let mut q = p.clone();
            // Last own item is the fastest digit.
            for &a in own.iter().rev() {
                q.set(a, grid[(idx % grid.len() as u64) as usize].clone());
                idx /= grid.len() as u64;
            }
            realize(g, i, q)
        })
        .reduce_with(|a, b| if b.revenue > a.revenue { b } else { a });
    Ok(best.expect("at least one assignment"))
}

struct TargetLp {
    target: ItemSet,
    value: Rational,
    prices: PriceVector,
    /// Own items priced by the LP, in variable order.
    vars: Vec<usize>,
    /// Packing rows: row `j - 1` bounds the sum of the variables in the
    /// bits of `j`.
    rows: Vec<Vec<Rational>>,
    bounds: Vec<Rational>,
    /// Same rows restricted to bundles reaching outside the target; `None`
    /// when there is no such bundle. Index 0 is the row without variables.
    outside: Vec<Option<Rational>>,
}

impl TargetLp {
    /// A point of the optimal face where every bundle reaching outside the
    /// target is strictly worse for the buyer than the target. All optima
    /// then lie inside the target, their union is the target, and the
    /// maximal buyer takes it.
    fn tie_free_prices(&self) -> Option<PriceVector> {
        let width = self.vars.len();
        let mut rows: Vec<Vec<Rational>> = self
            .rows
            .iter()
            .map(|r| r.iter().cloned().chain([Rational::zero()]).collect())
            .collect();
        let mut bounds = self.bounds.clone();
        for (j, cap) in self.outside.iter().enumerate() {
            if let Some(cap) = cap {
                rows.push(
                    (0..width)
                        .map(|t| Rational::from_integer((j >> t & 1) as i64))
                        .chain([Rational::one()])
                        .collect(),
                );
                bounds.push(cap.clone());
            }
        }
        rows.push(vec![-Rational::one(); width].into_iter().chain([Rational::zero()]).collect());
        bounds.push(-self.value.clone());
        let mut objective = vec![Rational::zero(); width];
        objective.push(Rational::one());
        match maximize(&objective, &rows, &bounds) {
            LpOutcome::Optimal { x, value } if value.is_positive() => {
                let mut prices = self.prices.clone();
                for (t, &a) in self.vars.iter().enumerate() {
                    prices.set(a, x[t].clone());
                }
                Some(prices)
            }
            _ => None,
        }
    }
}

/// Exact pricing problem for one vendor.
///
/// For a target bundle `B` the vendor can collect `sum_{a in B ∩ A_i} p(a)`
/// only if `u_b(B) >= u_b(S)` for every bundle `S`. Own items outside `B`
/// are priced out, which only relaxes these constraints, and items priced
/// above every bundle value can be ignored. Constraints sharing the same set
/// `J = (B \ S) ∩ A_i` of own price variables collapse to the tightest one,
/// so each target is a small packing LP over `B ∩ A_i`.
fn target_lps(g: &GameInstance, i: usize, p: &PriceVector) -> Result<Vec<TargetLp>, GameError> {
    let v = g.valuation();
    let own = g.vendors()[i];
    let bound = value_bound(v);
    let off = &bound + &Rational::one();
    let live_others: ItemSet = g
        .universe()
        .difference(own)
        .iter()
        .filter(|&a| *p.get(a) <= bound)
        .collect();
    let universe = own.union(live_others);
    if universe.len() > MAX_EXACT_ITEMS {
        return Err(GameError::Size(format!(
            "exact best response needs |A_i| + live competitor items <= {MAX_EXACT_ITEMS}, got {}",
            universe.len()
        )));
    }
    let size = universe.subset_count() as usize;
    let own_local = universe.extract(own) as u32;
    let others_local = universe.extract(live_others) as u32;
    let values: Vec<Rational> = (0..size as u64).into_par_iter().map(|l| v.eval(universe.deposit(l))).collect();
    let items: Vec<usize> = universe.iter().collect();
    let mut others_cost = vec![Rational::zero(); size];
    for l in 1..size {
        let low = l.trailing_zeros() as usize;
        let rest = &others_cost[l & (l - 1)];
        others_cost[l] = if others_local >> low & 1 == 1 {
            rest + p.get(items[low])
        } else {
            rest.clone()
        };
    }

    let solve = |b: u32| -> Option<TargetLp> {
        let vars = b & own_local;
        let var_set = ItemSet::from_bits(vars);
        let width = vars.count_ones() as usize;
        let mut caps: Vec<Option<Rational>> = vec![None; 1 << width];
        let mut outside: Vec<Option<Rational>> = vec![None; 1 << width];
        let base = &values[b as usize] - &others_cost[b as usize];
        let space = vars | others_local;
        let mut s = space;
        loop {
            let j = var_set.extract(ItemSet::from_bits(vars & !s)) as usize;
            let rhs = &base - &values[s as usize] + &others_cost[s as usize];
            if s & !b != 0 && outside[j].as_ref().is_none_or(|c| rhs < *c) {
                outside[j] = Some(rhs.clone());
            }
            if caps[j].as_ref().is_none_or(|c| rhs < *c) {
                caps[j] = Some(rhs);
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & space;
        }
        if caps[0].as_ref().is_some_and(Rational::is_negative) {
            return None;
        }
        let mut rows = Vec::with_capacity(caps.len() - 1);
        let mut bounds = Vec::with_capacity(caps.len() - 1);
        for (j, cap) in caps.into_iter().enumerate().skip(1) {
            rows.push((0..width).map(|t| Rational::from_integer((j >> t & 1) as i64)).collect());
            bounds.push(cap.expect("every J arises from S = B minus J"));
        }
        let LpOutcome::Optimal { x, value } = maximize(&vec![Rational::one(); width], &rows, &bounds) else {
            return None;
        };
        let target = universe.deposit(b as u64);
        let vars: Vec<usize> = var_set.iter().map(|local| items[local]).collect();
        let mut prices = p.clone();
        for a in own.iter() {
            prices.set(a, off.clone());
        }
        for (t, &a) in vars.iter().enumerate() {
            prices.set(a, x[t].clone());
        }
        Some(TargetLp {
            target,
            value,
            prices,
            vars,
            rows,
            bounds,
            outside,
        })
    };
    Ok((0..size as u32).into_par_iter().filter_map(solve).collect())
}

/// Lowers the positive LP prices by the factor `1 - 10^-j` until the buyer
/// takes every positively priced own item and revenue exceeds `floor`.
fn approach(g: &GameInstance, i: usize, lp: &TargetLp, floor: &Rational) -> Option<Realized> {
    let own = g.vendors()[i];
    let positive: ItemSet = own
        .intersection(lp.target)
        .iter()
        .filter(|&a| lp.prices.get(a).is_positive())
        .collect();
    let mut gap = Rational::one();
    for digits in 1..=APPROACH_MAX_DIGITS {
        gap = gap / Rational::from_integer(10);
        if digits < APPROACH_MIN_DIGITS {
            continue;
        }
        let keep = Rational::one() - &gap;
        let q = with_own(g, i, &lp.prices, |a| {
            if positive.contains(a) {
                lp.prices.get(a) * &keep
            } else {
                lp.prices.get(a).clone()
            }
        });
        let r = realize(g, i, q);
        if positive.is_subset(r.sold) && r.revenue > *floor {
            return Some(r);
        }
    }
    None
}

fn exact(g: &GameInstance, i: usize, p: &PriceVector, floor: Option<&Rational>) -> Result<(Realized, Rational), GameError> {
    let mut lps = target_lps(g, i, p)?;
    lps.sort_by(|a, b| b.value.cmp(&a.value).then(a.target.cmp(&b.target)));
    let supremum = lps.first().map(|t| t.value.clone()).unwrap_or_else(Rational::zero);
    let mut best = candidate_set(g, i, p);
    for lp in &lps {
        if lp.value <= best.revenue {
            break;
        }
        let mut r = realize(g, i, lp.prices.clone());
        if r.revenue < lp.value {
            if let Some(q) = lp.tie_free_prices() {
                r = realize(g, i, q);
            }
        }
        if r.revenue > best.revenue {
            best = r;
        }
    }
    if best.revenue < supremum {
        let floor = floor.map_or(best.revenue.clone(), |f| f.clone().max(best.revenue.clone()));
        if let Some(r) = lps.first().and_then(|top| approach(g, i, top, &floor)) {
            best = r;
        }
    }
    Ok((best, supremum))
}

fn best_response(
    g: &GameInstance,
    i: usize,
    p: &PriceVector,
    method: BrMethod,
    grid_cap: u64,
    floor: Option<&Rational>,
) -> Result<BestResponse, GameError> {
    g.check_prices(p)?;
    g.vendor_items(i)?;
    let (r, supremum) = match method {
        BrMethod::CandidateSet => (candidate_set(g, i, p), None),
        BrMethod::Grid => (grid_search(g, i, p, grid_cap)?, None),
        BrMethod::TargetSetExact => {
            let (r, sup) = exact(g, i, p, floor)?;
            (r, Some(sup))
        }
    };
    Ok(BestResponse {
        vendor: i,
        method,
        prices: r.prices,
        revenue: r.revenue,
        sold: r.sold,
        supremum,
    })
}

/// Vendor `i`'s best prices against the competitor prices in `p` (entries
/// for `A_i` are ignored).
pub fn vc_best_response(g: &GameInstance, i: usize, p: &PriceVector, method: BrMethod) -> Result<BestResponse, GameError> {
    best_response(g, i, p, method, DEFAULT_GRID_CAP, None)
}

pub fn vc_best_response_capped(
    g: &GameInstance,
    i: usize,
    p: &PriceVector,
    method: BrMethod,
    grid_cap: u64,
) -> Result<BestResponse, GameError> {
    best_response(g, i, p, method, grid_cap, None)
}

/// A profitable unilateral deviation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeviationCertificate {
    pub vendor: usize,
    /// New prices of the vendor's own items.
    pub deviation_prices: Vec<(usize, Rational)>,
    pub old_revenue: Rational,
    pub new_revenue: Rational,
    pub method: BrMethod,
}

impl DeviationCertificate {
    /// Reruns the buyer on `p` with the deviation applied and returns the
    /// deviating vendor's revenue.
    pub fn replay(&self, g: &GameInstance, p: &PriceVector) -> Result<Rational, GameError> {
        let mut q = p.clone();
        for (a, price) in &self.deviation_prices {
            q.set(*a, price.clone());
        }
        vendor_revenue(g, &q, self.vendor)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// No vendor can gain; only the exact method certifies.
    Certified,
    Refuted(DeviationCertificate),
    /// No deviation was found, but the search was inexact (or, for the
    /// exact method, a better supremum could not be realized).
    NotRefuted,
}

/// Checks whether `p` is a pure equilibrium of the continuous-price game.
pub fn vc_verify_ne(g: &GameInstance, p: &PriceVector, method: BrMethod) -> Result<Verdict, GameError> {
    vc_verify_ne_capped(g, p, method, DEFAULT_GRID_CAP)
}

pub fn vc_verify_ne_capped(
    g: &GameInstance,
    p: &PriceVector,
    method: BrMethod,
    grid_cap: u64,
) -> Result<Verdict, GameError> {
    g.check_prices(p)?;
    let current = settle(g, p.clone()).vendor_payoffs;
    let mut unresolved = false;
    for (i, now) in current.iter().enumerate() {
        let br = best_response(g, i, p, method, grid_cap, Some(now))?;
        unresolved |= br.supremum.as_ref().is_some_and(|sup| sup > now);
        if br.revenue > *now {
            return Ok(Verdict::Refuted(DeviationCertificate {
                vendor: i,
                deviation_prices: br.own_prices(g),
                old_revenue: now.clone(),
                new_revenue: br.revenue,
                method,
            }));
        }
    }
    Ok(if method.is_exact() && !unresolved {
        Verdict::Certified
    } else {
        Verdict::NotRefuted
    })
}

/// Result of replacing a price vector by the price-moderated profile that
/// offers exactly the bought items.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PmvcMapping {
    pub profile: StrategyProfile,
    pub sold: ItemSet,
    pub vc_payoffs: Vec<Rational>,
    pub pmvc_payoffs: Vec<Rational>,
    /// PMVC payoff minus continuous-game payoff, per vendor.
    pub deltas: Vec<Rational>,
    pub pmvc_sold: ItemSet,
    pub sold_preserved: bool,
}

/// Maps `p` to the profile `S_i = X(v;p) ∩ A_i`.
pub fn map_to_pmvc(g: &GameInstance, p: &PriceVector) -> Result<PmvcMapping, GameError> {
    g.check_prices(p)?;
    let vc = settle(g, p.clone());
    let profile = StrategyProfile::new(g, g.vendors().iter().map(|a| vc.sold.intersection(*a)).collect())?;
    let mech = pmvc_outcome(g, &profile)?;
    let deltas = mech
        .vendor_payoffs
        .iter()
        .zip(&vc.vendor_payoffs)
        .map(|(m, c)| m - c)
        .collect();
    Ok(PmvcMapping {
        sold_preserved: mech.sold == vc.sold,
        pmvc_sold: mech.sold,
        profile,
        sold: vc.sold,
        vc_payoffs: vc.vendor_payoffs,
        pmvc_payoffs: mech.vendor_payoffs,
        deltas,
    })
}

/// A state of best-response dynamics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DynamicsState {
    /// Price-moderated game: offered sets.
    Profile(StrategyProfile),
    /// Continuous-price game: full price vector.
    Prices(PriceVector),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicsStep {
    /// Turn number, counting turns where nobody moved.
    pub turn: u64,
    pub vendor: usize,
    pub state: DynamicsState,
    pub payoffs: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Termination {
    /// A full round passed without a move.
    Converged,
    /// The state and the vendor to move repeated; `period` counts moves.
    Cycle { period: usize },
    StepCap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicsTrace {
    pub start: DynamicsState,
    pub start_payoffs: Vec<Rational>,
    pub steps: Vec<DynamicsStep>,
    pub termination: Termination,
}

fn state_payoffs(g: &GameInstance, state: &DynamicsState) -> Vec<Rational> {
    match state {
        DynamicsState::Profile(s) => pmvc_payoffs(g, s),
        DynamicsState::Prices(p) => settle(g, p.clone()).vendor_payoffs,
    }
}

/// Round-robin strict best-response dynamics, vendor 1 first.
///
/// In the price-moderated game the mover picks the best offer with the
/// smallest subset index; in the continuous game it uses `method`. A vendor
/// moves only if it strictly improves. Stops after a full round without
/// moves, when a (state, next mover) pair repeats, or after `max_steps`
/// moves.
pub fn br_dynamics(
    g: &GameInstance,
    start: DynamicsState,
    method: BrMethod,
    max_steps: usize,
) -> Result<DynamicsTrace, GameError> {
    match &start {
        DynamicsState::Profile(s) => {
            StrategyProfile::new(g, s.sets().to_vec())?;
        }
        DynamicsState::Prices(p) => g.check_prices(p)?,
    }
    let k = g.k();
    let start_payoffs = state_payoffs(g, &start);
    let mut state = start.clone();
    let mut payoffs = start_payoffs.clone();
    let mut seen: HashMap<(DynamicsState, usize), usize> = HashMap::new();
    let mut steps = Vec::new();
    let mut quiet = 0;
    let mut turn = 0u64;
    let termination = loop {
        if quiet == k {
            break Termination::Converged;
        }
        if steps.len() == max_steps {
            break Termination::StepCap;
        }
        let i = (turn % k as u64) as usize;
        if let Some(&at) = seen.get(&(state.clone(), i)) {
            break Termination::Cycle { period: steps.len() - at };
        }
        seen.insert((state.clone(), i), steps.len());
        let next = match &state {
            DynamicsState::Profile(s) => {
                let best = pmvc_best_response(g, i, s)?[0];
                let candidate = s.with(i, best);
                let new_payoffs = pmvc_payoffs(g, &candidate);
                (new_payoffs[i] > payoffs[i]).then_some((DynamicsState::Profile(candidate), new_payoffs))
            }
            DynamicsState::Prices(p) => {
                let br = vc_best_response(g, i, p, method)?;
                (br.revenue > payoffs[i]).then(|| {
                    let out = settle(g, br.prices);
                    (DynamicsState::Prices(out.prices), out.vendor_payoffs)
                })
            }
        };
        match next {
            Some((s, pay)) => {
                state = s;
                payoffs = pay;
                quiet = 0;
                steps.push(DynamicsStep {
                    turn,
                    vendor: i,
                    state: state.clone(),
                    payoffs: payoffs.clone(),
                });
            }
            None => quiet += 1,
        }
        turn += 1;
    };
    Ok(DynamicsTrace {
        start,
        start_payoffs,
        steps,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{counterexample_instance, harmonic_instance};
    use crate::pmvc::pmvc_prices;
    use crate::valuation::Valuation;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn prices(list: &[&str]) -> PriceVector {
        PriceVector::new(list.iter().map(|s| r(s)).collect()).unwrap()
    }

    fn single_item(value: &str) -> GameInstance {
        let v = Valuation::table(vec!["x".into()], vec![r("0"), r(value)]).unwrap();
        GameInstance::new(v, vec![ItemSet::singleton(0)]).unwrap()
    }

    #[test]
    fn revenue_examples() {
        let g = counterexample_instance();
        let p = pmvc_prices(&g, &StrategyProfile::parse(&g, "{a}|{c}").unwrap()).unwrap();
        assert_eq!(vendor_revenue(&g, &p, 0).unwrap(), r("2.601"));
        let p = pmvc_prices(&g, &StrategyProfile::parse(&g, "{b}|{c,d}").unwrap()).unwrap();
        assert_eq!(vendor_revenue(&g, &p, 1).unwrap(), r("2.701"));
        let p = PriceVector::uniform(4, g.sentinel().clone());
        for i in 0..2 {
            assert_eq!(vendor_revenue(&g, &p, i).unwrap(), Rational::zero());
        }
    }

    #[test]
    fn counterexample_best_response() {
        let g = counterexample_instance();
        let p = prices(&["2.601", "8.6045", "0", "0"]);
        let br = vc_best_response(&g, 1, &p, BrMethod::TargetSetExact).unwrap();
        assert_eq!(br.revenue, r("2.703"));
        assert_eq!(br.supremum, Some(r("2.703")));
        assert_eq!(br.own_prices(&g), vec![(2, r("1.4015")), (3, r("1.3015"))]);
        assert_eq!(br.sold, ItemSet::from_items([2, 3]));
        let grid = vc_best_response(&g, 1, &p, BrMethod::Grid).unwrap();
        assert_eq!(grid.revenue, r("2.703"));
        let cand = vc_best_response(&g, 1, &p, BrMethod::CandidateSet).unwrap();
        assert!(cand.revenue <= r("2.703"));
    }

    #[test]
    fn lone_item_extracts_full_value() {
        let g = single_item("5");
        for method in [BrMethod::CandidateSet, BrMethod::TargetSetExact, BrMethod::Grid] {
            let br = vc_best_response(&g, 0, &prices(&["0"]), method).unwrap();
            assert_eq!(br.revenue, r("5"), "{method}");
            assert_eq!(br.prices.get(0), &r("5"));
        }
        assert_eq!(vc_verify_ne(&g, &prices(&["5"]), BrMethod::TargetSetExact).unwrap(), Verdict::Certified);
        assert!(matches!(
            vc_verify_ne(&g, &prices(&["4"]), BrMethod::TargetSetExact).unwrap(),
            Verdict::Refuted(_)
        ));
    }

    #[test]
    fn vendor_without_items_earns_nothing() {
        let v = Valuation::table(vec!["x".into()], vec![r("0"), r("5")]).unwrap();
        let g = GameInstance::new(v, vec![ItemSet::singleton(0), ItemSet::EMPTY]).unwrap();
        let br = vc_best_response(&g, 1, &prices(&["2"]), BrMethod::TargetSetExact).unwrap();
        assert_eq!(br.revenue, Rational::zero());
        assert_eq!(br.supremum, Some(Rational::zero()));
    }

    #[test]
    fn mechanism_prices_are_refuted_on_the_counterexample() {
        let g = counterexample_instance();
        let p = pmvc_prices(&g, &StrategyProfile::parse(&g, "{a}|{c}").unwrap()).unwrap();
        let Verdict::Refuted(cert) = vc_verify_ne(&g, &p, BrMethod::TargetSetExact).unwrap() else {
            panic!("expected a refutation");
        };
        assert_eq!(cert.vendor, 1);
        assert_eq!(cert.old_revenue, r("2.201"));
        assert_eq!(cert.new_revenue, r("2.703"));
        assert_eq!(cert.deviation_prices, vec![(2, r("1.4015")), (3, r("1.3015"))]);
        assert_eq!(cert.replay(&g, &p).unwrap(), cert.new_revenue);
    }

    #[test]
    fn unattainable_supremum_is_approached() {
        // Unit demand over x (vendor 1) and y (vendor 2, price 1): any price
        // below 1 sells x, but at exactly 1 the tie sends the buyer to y.
        let v = Valuation::table(vec!["x".into(), "y".into()], vec![r("0"), r("2"), r("2"), r("2")]).unwrap();
        let g = GameInstance::new(v, vec![ItemSet::singleton(0), ItemSet::singleton(1)]).unwrap();
        let p = prices(&["0", "1"]);
        let br = vc_best_response(&g, 0, &p, BrMethod::TargetSetExact).unwrap();
        assert_eq!(br.supremum, Some(r("1")));
        assert!(br.revenue < r("1") && br.revenue > r("0.9"));
        assert_eq!(br.sold, ItemSet::singleton(0));
        // Vendor 1 at 0.99 is not an equilibrium: it can approach 1.
        let Verdict::Refuted(cert) = vc_verify_ne(&g, &prices(&["0.99", "1"]), BrMethod::TargetSetExact).unwrap()
        else {
            panic!("expected a refutation");
        };
        assert!(cert.new_revenue > r("0.99"));
        assert_eq!(cert.replay(&g, &prices(&["0.99", "1"])).unwrap(), cert.new_revenue);
    }

    #[test]
    fn mapping_examples() {
        let g = counterexample_instance();
        let m = map_to_pmvc(&g, &prices(&["2", "8.6045", "2", "8.6045"])).unwrap();
        assert_eq!(m.profile, StrategyProfile::parse(&g, "{a}|{c}").unwrap());
        assert_eq!(m.deltas, vec![r("0.601"), r("0.201")]);
        assert!(m.sold_preserved);

        let p = pmvc_prices(&g, &StrategyProfile::parse(&g, "{a,b}|{d}").unwrap()).unwrap();
        let m = map_to_pmvc(&g, &p).unwrap();
        assert!(m.deltas.iter().all(Rational::is_zero));

        let m = map_to_pmvc(&g, &PriceVector::uniform(4, g.sentinel().clone())).unwrap();
        assert_eq!(m.profile, StrategyProfile::empty(&g));
        assert!(m.deltas.iter().all(Rational::is_zero));
    }

    #[test]
    fn counterexample_dynamics_cycle() {
        let g = counterexample_instance();
        let start = StrategyProfile::parse(&g, "{a}|{c}").unwrap();
        let trace = br_dynamics(&g, DynamicsState::Profile(start), BrMethod::default(), 100).unwrap();
        assert_eq!(trace.termination, Termination::Cycle { period: 4 });
        let visited: Vec<String> = trace
            .steps
            .iter()
            .map(|s| match &s.state {
                DynamicsState::Profile(p) => p.display(g.names()).to_string(),
                DynamicsState::Prices(_) => unreachable!(),
            })
            .collect();
        assert_eq!(visited, ["{a}|{c,d}", "{b}|{c,d}", "{b}|{c}", "{a}|{c}"]);
    }

    #[test]
    fn harmonic_dynamics_start_at_equilibrium() {
        let g = harmonic_instance(2, 3).unwrap();
        let start = StrategyProfile::new(&g, vec![ItemSet::singleton(1), ItemSet::singleton(4)]).unwrap();
        let trace = br_dynamics(&g, DynamicsState::Profile(start), BrMethod::default(), 100).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn single_vendor_converges_quickly() {
        let g = single_item("5");
        let trace = br_dynamics(&g, DynamicsState::Prices(prices(&["1"])), BrMethod::TargetSetExact, 10).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].payoffs, vec![r("5")]);
        let trace = br_dynamics(&g, DynamicsState::Profile(StrategyProfile::empty(&g)), BrMethod::default(), 10).unwrap();
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn step_cap_stops_dynamics() {
        let g = counterexample_instance();
        let start = StrategyProfile::parse(&g, "{a}|{c}").unwrap();
        let trace = br_dynamics(&g, DynamicsState::Profile(start), BrMethod::default(), 2).unwrap();
        assert_eq!(trace.termination, Termination::StepCap);
        assert_eq!(trace.steps.len(), 2);
    }

    #[test]
    fn grid_contains_marginals_and_extremes() {
        let g = counterexample_instance();
        let grid = price_grid(&g);
        assert_eq!(grid.first(), Some(&Rational::zero()));
        assert_eq!(grid.last(), Some(g.sentinel()));
        assert!(grid.contains(&r("1.4015")) && grid.contains(&r("1.3015")));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [BrMethod::CandidateSet, BrMethod::TargetSetExact, BrMethod::Grid] {
            assert_eq!(m.to_string().parse::<BrMethod>().unwrap(), m);
        }
        assert_eq!("exact".parse::<BrMethod>().unwrap(), BrMethod::TargetSetExact);
        assert!("simplex".parse::<BrMethod>().is_err());
    }
}
