//! Ready-made games: the four-item game without pure equilibria, the
//! harmonic family with logarithmic welfare loss and its perturbed variant,
//! category-max games with their closed-form equilibrium, and seeded random
//! generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::GameError;
use crate::itemset::ItemSet;
use crate::market::PriceVector;
use crate::pmvc::GameInstance;
use crate::rational::Rational;
use crate::valuation::{Curve, Valuation, ValuationKind};

fn dec(s: &str) -> Rational {
    s.parse().expect("valid literal")
}

/// Two vendors with two items each (`A_1 = {a,b}`, `A_2 = {c,d}`) whose
/// price-moderated game has no pure equilibrium.
pub fn counterexample_instance() -> GameInstance {
    let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    // rows: {}, {a}, {b}, {a,b}; columns: {}, {c}, {d}, {c,d}
    let grid = [
        ["0", "2.803", "2.703", "4.1045"],
        ["3.203", "5.404", "5.304", "6.5045"],
        ["2.503", "5.304", "5.204", "6.6045"],
        ["4.4045", "6.6045", "6.5045", "7.6045"],
    ];
    let mut values = vec![Rational::zero(); 16];
    for (row, cells) in grid.iter().enumerate() {
        for (col, cell) in cells.iter().enumerate() {
            values[row | col << 2] = dec(cell);
        }
    }
    let v = Valuation::table(names, values).expect("table is normalized");
    GameInstance::new(v, vec![ItemSet::from_items([0, 1]), ItemSet::from_items([2, 3])])
        .expect("table is monotone and submodular")
}

fn grouped_names(k: usize, m: usize) -> (Vec<String>, Vec<ItemSet>) {
    let names = (1..=k)
        .flat_map(|i| (1..=m).map(move |j| format!("a{i}_{j}")))
        .collect();
    let groups = (0..k).map(|i| ItemSet::from_items(i * m..(i + 1) * m)).collect();
    (names, groups)
}

fn check_grid(k: usize, m: usize) -> Result<(), GameError> {
    if k == 0 || m == 0 {
        return Err(GameError::Size(format!("need k >= 1 and m >= 1, got k={k}, m={m}")));
    }
    if k * m > crate::itemset::MAX_ITEMS {
        return Err(GameError::Size(format!(
            "k*m = {} exceeds {} items",
            k * m,
            crate::itemset::MAX_ITEMS
        )));
    }
    Ok(())
}

/// `k` vendors with `m` items each; `v(T) = sum_i H_{|T ∩ A_i|}`.
pub fn harmonic_instance(k: usize, m: usize) -> Result<GameInstance, GameError> {
    check_grid(k, m)?;
    let (names, groups) = grouped_names(k, m);
    let v = Valuation::additive_groups(names, groups.clone(), Curve::Harmonic)?;
    GameInstance::new(v, groups)
}

/// Curve of [`pos_instance`]: `l(0) = 0`, `l(1) = 1` and
/// `l(t) = H_t - eps (t-1)/(m-1)` for `t >= 2`, so `l(m) = H_m - eps`.
///
/// Spreading the perturbation makes every increment `1/t - eps/(m-1)`
/// strictly smaller than `1/t`; offering `t >= 2` items then earns
/// `t (l(t) - l(t-1)) < 1`, and only single-item offers survive as
/// equilibria.
pub fn pos_curve(m: usize, eps: &Rational) -> Vec<Rational> {
    let mut points = vec![Rational::zero()];
    let mut h = Rational::zero();
    for t in 1..=m {
        h += Rational::new(1, t as i64);
        let shift = if t == 1 {
            Rational::zero()
        } else {
            eps * &Rational::new(t as i64 - 1, m as i64 - 1)
        };
        points.push(&h - &shift);
    }
    points
}

/// Harmonic family perturbed so that the only equilibria are the
/// one-item-per-vendor profiles. Requires `0 < eps < 1/(2m)`.
pub fn pos_instance(k: usize, m: usize, eps: &Rational) -> Result<GameInstance, GameError> {
    check_grid(k, m)?;
    let bound = Rational::new(1, 2 * m as i64);
    if !eps.is_positive() || *eps >= bound {
        return Err(GameError::EpsilonOutOfRange {
            eps: eps.to_string(),
            bound: bound.to_string(),
        });
    }
    let (names, groups) = grouped_names(k, m);
    let v = Valuation::additive_groups(names, groups.clone(), Curve::Explicit(pos_curve(m, eps)))?;
    // new() re-verifies monotonicity and submodularity of the perturbed curve.
    GameInstance::new(v, groups)
}

/// Category-max game description.
#[derive(Clone, Debug)]
pub struct CdspSpec {
    pub names: Vec<String>,
    pub categories: Vec<ItemSet>,
    pub item_values: Vec<Rational>,
    pub vendors: Vec<ItemSet>,
}

pub fn cdsp_instance(spec: CdspSpec) -> Result<GameInstance, GameError> {
    let v = Valuation::category_max(spec.names, spec.categories, spec.item_values)?;
    GameInstance::new(v, spec.vendors)
}

/// How one category is priced in [`cdsp_equilibrium`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CategoryPricing {
    pub category: ItemSet,
    /// Vendor owning the most valuable item (lowest index on ties).
    pub winner: usize,
    pub winning_item: usize,
    /// Best value among the category's items not owned by the winner; 0
    /// when the winner owns the whole category.
    pub runner_up_value: Rational,
    /// Each participating vendor's most valuable item in the category.
    pub best_items: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CdspEquilibrium {
    pub prices: PriceVector,
    pub categories: Vec<CategoryPricing>,
}

/// Closed-form equilibrium prices of a category-max game.
///
/// In every category the vendor with the most valuable item prices it at
/// its value minus the best value any other vendor offers there; every other
/// vendor prices its own best item in the category at 0; all remaining items
/// are priced out at `v(A*) + 1`.
pub fn cdsp_equilibrium(g: &GameInstance) -> Result<CdspEquilibrium, GameError> {
    let ValuationKind::CategoryMax {
        categories,
        item_values,
        ..
    } = g.valuation().kind()
    else {
        return Err(GameError::NotCategoryMax);
    };
    let mut prices = vec![g.sentinel().clone(); g.n()];
    let mut report = Vec::with_capacity(categories.len());
    for &category in categories {
        // Best item per vendor; ties go to the lowest item id.
        let best_items: Vec<(usize, usize)> = g
            .vendors()
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                let mut best: Option<usize> = None;
                for item in category.intersection(*a).iter() {
                    if best.is_none_or(|b| item_values[item] > item_values[b]) {
                        best = Some(item);
                    }
                }
                best.map(|item| (i, item))
            })
            .collect();
        let Some(&(winner, winning_item)) = best_items
            .iter()
            .fold(None, |acc: Option<&(usize, usize)>, cand| match acc {
                Some(cur) if item_values[cand.1] <= item_values[cur.1] => Some(cur),
                _ => Some(cand),
            })
        else {
            continue;
        };
        let runner_up_value = category
            .difference(g.vendors()[winner])
            .iter()
            .map(|item| item_values[item].clone())
            .max()
            .unwrap_or_else(Rational::zero);
        prices[winning_item] = &item_values[winning_item] - &runner_up_value;
        for &(vendor, item) in &best_items {
            if vendor != winner {
                prices[item] = Rational::zero();
            }
        }
        report.push(CategoryPricing {
            category,
            winner,
            winning_item,
            runner_up_value,
            best_items,
        });
    }
    Ok(CdspEquilibrium {
        prices: PriceVector::new(prices)?,
        categories: report,
    })
}

/// Random monotone submodular valuation families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Weighted coverage: each item covers a random subset of weighted
    /// elements; `v(S)` is the weight of the union.
    Coverage,
    /// Random partition into groups with a random concave nondecreasing
    /// curve.
    AdditiveConcave,
}

pub const MAX_RANDOM_ITEMS: usize = 12;

fn random_vendors(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<ItemSet> {
    let mut vendors = vec![ItemSet::EMPTY; k];
    for item in 0..n {
        let i = rng.random_range(0..k);
        vendors[i] = vendors[i].with(item);
    }
    vendors
}

fn item_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("i{i}")).collect()
}

/// Deterministic random game with `n` items and `k` vendors (some vendors
/// may end up owning nothing).
pub fn random_instance(seed: u64, n: usize, k: usize, generator: Generator) -> Result<GameInstance, GameError> {
    if n > MAX_RANDOM_ITEMS {
        return Err(GameError::Size(format!("random instances are capped at {MAX_RANDOM_ITEMS} items")));
    }
    if k == 0 {
        return Err(GameError::NoVendors);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = item_names(n);
    let v = match generator {
        Generator::Coverage => {
            let elements = n + 3;
            let weights: Vec<Rational> = (0..elements)
                .map(|_| Rational::new(rng.random_range(1..=40), 4))
                .collect();
            let covers: Vec<u64> = (0..n)
                .map(|_| (0..elements).filter(|_| rng.random_bool(0.35)).fold(0u64, |m, e| m | 1 << e))
                .collect();
            let values = (0..1u32 << n)
                .map(|mask| {
                    let covered = ItemSet::from_bits(mask)
                        .iter()
                        .fold(0u64, |acc, i| acc | covers[i]);
                    (0..elements)
                        .filter(|e| covered >> e & 1 == 1)
                        .map(|e| &weights[e])
                        .sum()
                })
                .collect();
            Valuation::table(names, values)?
        }
        Generator::AdditiveConcave => {
            let group_count = rng.random_range(1..=n.clamp(1, 3));
            let mut groups = vec![ItemSet::EMPTY; group_count];
            for item in 0..n {
                let g = rng.random_range(0..group_count);
                groups[g] = groups[g].with(item);
            }
            groups.retain(|g| !g.is_empty());
            let max_size = groups.iter().map(|g| g.len()).max().unwrap_or(0);
            let mut steps: Vec<i64> = (0..max_size).map(|_| rng.random_range(0..=24)).collect();
            steps.sort_unstable_by(|a, b| b.cmp(a));
            let mut points = vec![Rational::zero()];
            for s in steps {
                let next = points.last().expect("nonempty") + &Rational::new(s, 3);
                points.push(next);
            }
            Valuation::additive_groups(names, groups, Curve::Explicit(points))?
        }
    };
    let vendors = random_vendors(&mut rng, n, k);
    GameInstance::new(v, vendors)
}

/// Deterministic random category-max game with `n` items, `k` vendors and
/// at most `r` categories. Values are small integers, so equal values (and
/// hence tied winners) do occur.
pub fn random_cdsp(seed: u64, n: usize, k: usize, r: usize) -> Result<GameInstance, GameError> {
    if n == 0 || r == 0 || k == 0 {
        return Err(GameError::Size("need n, k, r >= 1".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items: Vec<usize> = (0..n).collect();
    items.shuffle(&mut rng);
    let mut categories = vec![ItemSet::EMPTY; r.min(n)];
    for (slot, &item) in items.iter().enumerate() {
        // The first r items seed distinct categories so none is empty.
        let c = if slot < categories.len() {
            slot
        } else {
            rng.random_range(0..categories.len())
        };
        categories[c] = categories[c].with(item);
    }
    let item_values = (0..n).map(|_| Rational::from_integer(rng.random_range(1..=12))).collect();
    let vendors = random_vendors(&mut rng, n, k);
    cdsp_instance(CdspSpec {
        names: item_names(n),
        categories,
        item_values,
        vendors,
    })
}

/// Deterministic random prices for `g`, biased toward ties: each item gets
/// 0, the price-out value `v(A*) + 1`, its marginal value to a random bundle,
/// or a random multiple of 1/4 up to `v(A*)`.
pub fn random_prices(g: &GameInstance, seed: u64) -> PriceVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = g.valuation();
    let top = v.grand_value();
    let quarters = (&top * &Rational::from_integer(4)).to_f64().floor().max(0.0) as i64;
    let prices = (0..g.n())
        .map(|a| match rng.random_range(0..20) {
            0..=1 => Rational::zero(),
            2..=4 => g.sentinel().clone(),
            5..=11 => {
                let bundle = ItemSet::from_bits(rng.random_range(0..=g.universe().bits()) & g.universe().bits());
                v.marginal_of(a, bundle)
            }
            _ => Rational::new(rng.random_range(0..=quarters), 4),
        })
        .collect();
    PriceVector::new(prices).expect("all generated prices are nonnegative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::demand;
    use crate::pmvc::{pmvc_pure_ne, StrategyProfile, DEFAULT_PROFILE_CAP};

    #[test]
    fn counterexample_table_entries() {
        let g = counterexample_instance();
        let v = g.valuation();
        assert_eq!(v.grand_value(), dec("7.6045"));
        assert_eq!(v.value(ItemSet::EMPTY).unwrap(), Rational::zero());
        assert_eq!(v.value(ItemSet::from_items([0, 2])).unwrap(), dec("5.404"));
        assert_eq!(v.value(ItemSet::from_items([1, 2, 3])).unwrap(), dec("6.6045"));
        assert!(v.check_monotone().passed());
        assert!(v.check_submodular().passed());
        assert_eq!(v.marginal(0, ItemSet::singleton(2)).unwrap(), dec("2.601"));
        assert_eq!(v.marginal(0, ItemSet::from_items([1, 2, 3])).unwrap(), dec("1"));
    }

    #[test]
    fn harmonic_values() {
        let g = harmonic_instance(2, 3).unwrap();
        assert_eq!(g.valuation().grand_value(), Rational::new(11, 3));
        let g = harmonic_instance(1, 1).unwrap();
        assert_eq!(g.valuation().grand_value(), Rational::one());
        assert!(harmonic_instance(3, 7).is_err());
        assert!(harmonic_instance(0, 2).is_err());
    }

    #[test]
    fn pos_curve_is_sound_after_expansion() {
        let eps = Rational::new(1, 100);
        let g = pos_instance(2, 3, &eps).unwrap();
        let table = g.valuation().to_table();
        assert!(table.check_monotone().passed());
        assert!(table.check_submodular().passed());
        assert_eq!(pos_curve(3, &eps)[3], Rational::new(11, 6) - &eps);
        assert!(pos_instance(2, 3, &Rational::new(1, 6)).is_err());
        assert!(pos_instance(2, 3, &Rational::zero()).is_err());
    }

    #[test]
    fn uniform_shift_leaves_ties_for_large_offers() {
        // With l(t) = H_t - eps for every t >= 2 the increments from t = 3 on
        // are exactly 1/t, so offering three items earns exactly 1 and ties
        // with a single item.
        let eps = Rational::new(1, 100);
        let (names, groups) = grouped_names(2, 3);
        let mut points = vec![Rational::zero(), Rational::one()];
        for t in 2..=3i64 {
            let h: Rational = (1..=t).map(|j| Rational::new(1, j)).sum();
            points.push(h - &eps);
        }
        let v = Valuation::additive_groups(names, groups.clone(), Curve::Explicit(points)).unwrap();
        let g = GameInstance::new(v, groups.clone()).unwrap();
        let ne = pmvc_pure_ne(&g, DEFAULT_PROFILE_CAP).unwrap();
        assert!(ne.contains(&StrategyProfile::new(&g, groups).unwrap()));
        assert_eq!(ne.len(), 16);
    }

    fn one_category() -> GameInstance {
        cdsp_instance(CdspSpec {
            names: vec!["x".into(), "y".into()],
            categories: vec![ItemSet::full(2)],
            item_values: vec![dec("10"), dec("8")],
            vendors: vec![ItemSet::singleton(0), ItemSet::singleton(1)],
        })
        .unwrap()
    }

    #[test]
    fn cdsp_single_category() {
        let g = one_category();
        assert_eq!(g.valuation().grand_value(), dec("10"));
        let eq = cdsp_equilibrium(&g).unwrap();
        assert_eq!(eq.prices.as_slice(), &[dec("2"), dec("0")]);
        // The free losing item ties in, the maximal buyer takes both.
        assert_eq!(demand(g.valuation(), &eq.prices).chosen, ItemSet::full(2));
    }

    #[test]
    fn cdsp_monopoly_extracts_full_value() {
        let g = cdsp_instance(CdspSpec {
            names: vec!["x".into()],
            categories: vec![ItemSet::singleton(0)],
            item_values: vec![dec("10")],
            vendors: vec![ItemSet::singleton(0)],
        })
        .unwrap();
        assert_eq!(cdsp_equilibrium(&g).unwrap().prices.as_slice(), &[dec("10")]);

        // One vendor owning a two-item category: best item at full value,
        // the other priced out.
        let g = cdsp_instance(CdspSpec {
            names: vec!["x".into(), "y".into()],
            categories: vec![ItemSet::full(2)],
            item_values: vec![dec("4"), dec("6")],
            vendors: vec![ItemSet::full(2)],
        })
        .unwrap();
        let eq = cdsp_equilibrium(&g).unwrap();
        assert_eq!(eq.prices.as_slice(), &[dec("7"), dec("6")]);
    }

    #[test]
    fn cdsp_categories_are_independent() {
        let g = cdsp_instance(CdspSpec {
            names: ["x", "y", "z", "w"].iter().map(|s| s.to_string()).collect(),
            categories: vec![ItemSet::from_items([0, 1]), ItemSet::from_items([2, 3])],
            item_values: vec![dec("10"), dec("8"), dec("3"), dec("5")],
            vendors: vec![ItemSet::from_items([0, 2]), ItemSet::from_items([1, 3])],
        })
        .unwrap();
        let eq = cdsp_equilibrium(&g).unwrap();
        assert_eq!(eq.prices.as_slice(), &[dec("2"), dec("0"), dec("0"), dec("2")]);
        assert_eq!(eq.categories[1].winner, 1);
    }

    #[test]
    fn cdsp_tied_winner_prices_at_zero() {
        let g = cdsp_instance(CdspSpec {
            names: vec!["x".into(), "y".into()],
            categories: vec![ItemSet::full(2)],
            item_values: vec![dec("7"), dec("7")],
            vendors: vec![ItemSet::singleton(0), ItemSet::singleton(1)],
        })
        .unwrap();
        let eq = cdsp_equilibrium(&g).unwrap();
        assert_eq!(eq.categories[0].winner, 0);
        assert_eq!(eq.prices.as_slice(), &[dec("0"), dec("0")]);
    }

    #[test]
    fn cdsp_rejects_other_kinds() {
        assert!(matches!(
            cdsp_equilibrium(&counterexample_instance()),
            Err(GameError::NotCategoryMax)
        ));
    }

    #[test]
    fn random_generators_are_deterministic_and_sound() {
        for generator in [Generator::Coverage, Generator::AdditiveConcave] {
            for seed in 0..20 {
                let a = random_instance(seed, 6, 3, generator).unwrap();
                let b = random_instance(seed, 6, 3, generator).unwrap();
                assert_eq!(a.vendors(), b.vendors());
                let (ta, tb) = (a.valuation().to_table(), b.valuation().to_table());
                for s in ta.universe().subsets() {
                    assert_eq!(ta.eval(s), tb.eval(s));
                }
                assert!(ta.check_monotone().passed());
                assert!(ta.check_submodular().passed());
            }
        }
        assert!(random_instance(0, 13, 2, Generator::Coverage).is_err());
    }

    #[test]
    fn random_prices_are_deterministic() {
        let g = counterexample_instance();
        for seed in 0..20 {
            let p = random_prices(&g, seed);
            assert_eq!(p, random_prices(&g, seed));
            assert!(p.as_slice().iter().all(|x| !x.is_negative() && x <= g.sentinel()));
        }
    }

    #[test]
    fn random_cdsp_is_sound() {
        for seed in 0..10 {
            let g = random_cdsp(seed, 7, 3, 3).unwrap();
            assert!(g.valuation().check_submodular().passed());
            let ValuationKind::CategoryMax { categories, .. } = g.valuation().kind() else {
                panic!("wrong kind");
            };
            assert!(categories.iter().all(|c| !c.is_empty()));
        }
    }
}
