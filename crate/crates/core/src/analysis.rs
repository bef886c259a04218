//! Welfare, price of anarchy and stability, and checkers for the two
//! inequalities behind the `H_m + 1` bound.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::GameError;
use crate::itemset::ItemSet;
use crate::market::{demand, PriceVector};
use crate::pmvc::{improving_vendor, pmvc_pure_ne, pmvc_welfare, GameInstance, StrategyProfile};
use crate::rational::Rational;

/// `v(X(v;p))`.
pub fn welfare(g: &GameInstance, p: &PriceVector) -> Result<Rational, GameError> {
    g.check_prices(p)?;
    Ok(g.valuation().eval(demand(g.valuation(), p).chosen))
}

/// `H_m = 1 + 1/2 + ... + 1/m`.
pub fn harmonic(m: usize) -> Result<Rational, GameError> {
    if m == 0 {
        return Err(GameError::Size("harmonic number needs m >= 1".to_string()));
    }
    Ok(harmonic_or_zero(m))
}

fn harmonic_or_zero(m: usize) -> Rational {
    (1..=m as i64).map(|t| Rational::new(1, t)).sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquilibriumReport {
    pub equilibria: Vec<(StrategyProfile, Rational)>,
    pub optimal_welfare: Rational,
    /// `None` when there is no pure equilibrium.
    pub poa: Option<Rational>,
    pub pos: Option<Rational>,
    /// Largest vendor size.
    pub m: usize,
    pub bound_hm_plus_1: Rational,
    /// Every equilibrium's welfare ratio is at most `H_m + 1`.
    pub bound_satisfied: bool,
}

fn ratio(optimal: &Rational, welfare: &Rational) -> Result<Rational, GameError> {
    if optimal.is_zero() {
        return Ok(Rational::one());
    }
    if welfare.is_zero() {
        return Err(GameError::ZeroWelfareEquilibrium);
    }
    Ok(optimal / welfare)
}

/// Enumerates pure equilibria of the price-moderated game and compares their
/// welfare with `v(A*)`, the optimum for a monotone buyer.
pub fn equilibrium_report(g: &GameInstance, cap: u64) -> Result<EquilibriumReport, GameError> {
    let equilibria: Vec<(StrategyProfile, Rational)> = pmvc_pure_ne(g, cap)?
        .into_iter()
        .map(|s| {
            let w = pmvc_welfare(g, &s);
            (s, w)
        })
        .collect();
    let optimal_welfare = g.valuation().grand_value();
    let worst = equilibria.iter().map(|(_, w)| w).min();
    let best = equilibria.iter().map(|(_, w)| w).max();
    let poa = worst.map(|w| ratio(&optimal_welfare, w)).transpose()?;
    let pos = best.map(|w| ratio(&optimal_welfare, w)).transpose()?;
    let m = g.max_vendor_size();
    let bound_hm_plus_1 = harmonic_or_zero(m) + Rational::one();
    let bound_satisfied = poa.as_ref().is_none_or(|r| *r <= bound_hm_plus_1);
    Ok(EquilibriumReport {
        equilibria,
        optimal_welfare,
        poa,
        pos,
        m,
        bound_hm_plus_1,
        bound_satisfied,
    })
}

impl EquilibriumReport {
    /// One line per equilibrium followed by the summary.
    pub fn render_text(&self, names: &[String]) -> String {
        let mut out = String::new();
        let count = self.equilibria.len();
        let _ = writeln!(out, "{count} pure Nash equilibri{}", if count == 1 { "um" } else { "a" });
        if count > 0 {
            let width = self
                .equilibria
                .iter()
                .map(|(s, _)| s.display(names).to_string().len())
                .max()
                .unwrap_or(0)
                .max("profile".len());
            let _ = writeln!(out, "  {:<width$}  welfare", "profile");
            for (s, w) in &self.equilibria {
                let _ = writeln!(out, "  {:<width$}  {w}", s.display(names).to_string());
            }
        }
        let _ = writeln!(out, "optimal welfare v(A*) = {}", self.optimal_welfare);
        let bound = format!("bound H_{}+1 = {}", self.m, self.bound_hm_plus_1);
        match (&self.poa, &self.pos) {
            (Some(poa), Some(pos)) => {
                let verdict = if self.bound_satisfied { "satisfied" } else { "VIOLATED" };
                let _ = writeln!(out, "PoA = {poa}, {bound}, {verdict}");
                let _ = writeln!(out, "PoS = {pos}");
            }
            _ => {
                let _ = writeln!(out, "PoA = undefined (no pure NE), {bound}");
                let _ = writeln!(out, "PoS = undefined (no pure NE)");
            }
        }
        out
    }
}

/// One inequality evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InequalityCheck {
    /// Vendor the inequality is about, if any.
    pub vendor: Option<usize>,
    pub lhs: Rational,
    pub rhs: Rational,
    /// Nonnegative exactly when the inequality holds.
    pub slack: Rational,
    pub holds: bool,
}

impl InequalityCheck {
    fn at_most(vendor: Option<usize>, lhs: Rational, rhs: Rational) -> Self {
        let slack = &rhs - &lhs;
        InequalityCheck {
            vendor,
            holds: !slack.is_negative(),
            lhs,
            rhs,
            slack,
        }
    }

    fn at_least(vendor: Option<usize>, lhs: Rational, rhs: Rational) -> Self {
        let slack = &lhs - &rhs;
        InequalityCheck {
            vendor,
            holds: !slack.is_negative(),
            lhs,
            rhs,
            slack,
        }
    }
}

fn others_offered(s: &StrategyProfile, i: usize) -> ItemSet {
    s.with(i, ItemSet::EMPTY).union()
}

/// For an equilibrium `s`, checks per vendor
/// `v(A_i ∪ S_-i) <= v(S_-i) + H_{|A_i|} (v(S) - v(S_-i))`.
pub fn check_lemma1(g: &GameInstance, s: &StrategyProfile) -> Result<Vec<InequalityCheck>, GameError> {
    StrategyProfile::new(g, s.sets().to_vec())?;
    if let Some(vendor) = improving_vendor(g, s) {
        return Err(GameError::NotAnEquilibrium { vendor });
    }
    let v = g.valuation();
    let all = v.eval(s.union());
    Ok(g
        .vendors()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let rest = others_offered(s, i);
            let base = v.eval(rest);
            let lhs = v.eval(a.union(rest));
            let rhs = &base + &(harmonic_or_zero(a.len()) * (&all - &base));
            InequalityCheck::at_most(Some(i), lhs, rhs)
        })
        .collect())
}

/// Checks `sum_i v(A_i ∪ S_-i) >= v(A*) + (k-1) v(S)`.
pub fn check_lemma2(g: &GameInstance, s: &StrategyProfile) -> Result<InequalityCheck, GameError> {
    StrategyProfile::new(g, s.sets().to_vec())?;
    let v = g.valuation();
    let lhs = g
        .vendors()
        .iter()
        .enumerate()
        .map(|(i, a)| v.eval(a.union(others_offered(s, i))))
        .sum();
    let rhs = v.grand_value() + Rational::from_integer(g.k() as i64 - 1) * v.eval(s.union());
    Ok(InequalityCheck::at_least(None, lhs, rhs))
}
