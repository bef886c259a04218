//! File formats: JSON instances, payoff tables (CSV and JSON), equilibrium
//! reports and dynamics traces. Every number is a decimal string (or
//! `num/den` when no finite decimal exists).

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::analysis::{EquilibriumReport, InequalityCheck};
use crate::error::{SchemaError, ValuationError};
use crate::itemset::{parse_named_set, ItemSet};
use crate::market::PriceVector;
use crate::pmvc::{GameInstance, Outcome, StrategyProfile};
use crate::rational::Rational;
use crate::valuation::{Curve, Valuation, ValuationKind};
use crate::vcgame::{DynamicsState, DynamicsTrace, Termination};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    Harmonic,
    Explicit { values: Vec<Rational> },
}

/// Valuation part of an instance file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ValuationSpec {
    /// Keys are comma-separated item names (`"a,c"`, braces optional); the
    /// empty bundle may be omitted.
    Table { entries: IndexMap<String, Rational> },
    AdditiveGroups { groups: Vec<Vec<String>>, curve: CurveSpec },
    CategoryMax {
        categories: Vec<Vec<String>>,
        item_values: IndexMap<String, Rational>,
    },
}

/// A game on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    /// Item order; defaults to the order items appear in `vendors`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<String>>,
    #[serde(flatten)]
    pub valuation: ValuationSpec,
    pub vendors: Vec<Vec<String>>,
}

fn named_set(names: &[String], list: &[String]) -> Result<ItemSet, ValuationError> {
    let mut set = ItemSet::EMPTY;
    for name in list {
        let id = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ValuationError::UnknownItem(name.clone()))?;
        if set.contains(id) {
            return Err(ValuationError::DuplicateItem(name.clone()));
        }
        set = set.with(id);
    }
    Ok(set)
}

fn set_key(s: ItemSet, names: &[String]) -> String {
    s.iter().map(|i| names[i].as_str()).collect::<Vec<_>>().join(",")
}

impl InstanceFile {
    pub fn item_names(&self) -> Result<Vec<String>, SchemaError> {
        if let Some(items) = &self.items {
            return Ok(items.clone());
        }
        let mut names: Vec<String> = Vec::new();
        for name in self.vendors.iter().flatten() {
            if names.contains(name) {
                return Err(ValuationError::DuplicateItem(name.clone()).into());
            }
            names.push(name.clone());
        }
        Ok(names)
    }

    /// Valuation and vendor sets, without checking soundness.
    pub fn build(&self) -> Result<(Valuation, Vec<ItemSet>), SchemaError> {
        let names = self.item_names()?;
        let v = match &self.valuation {
            ValuationSpec::Table { entries } => {
                let n = names.len();
                if n > crate::itemset::MAX_ITEMS {
                    return Err(ValuationError::TooManyItems(n).into());
                }
                let mut values: Vec<Option<Rational>> = vec![None; 1 << n];
                for (key, value) in entries {
                    let s = parse_named_set(key, &names)?;
                    let slot = &mut values[s.bits() as usize];
                    if slot.is_some() {
                        return Err(ValuationError::DuplicateEntry(key.clone()).into());
                    }
                    *slot = Some(value.clone());
                }
                values[0].get_or_insert_with(Rational::zero);
                let values = values
                    .into_iter()
                    .enumerate()
                    .map(|(mask, v)| {
                        v.ok_or_else(|| {
                            ValuationError::MissingEntry(format!("{{{}}}", set_key(ItemSet::from_bits(mask as u32), &names)))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Valuation::table(names.clone(), values)?
            }
            ValuationSpec::AdditiveGroups { groups, curve } => {
                let groups = groups
                    .iter()
                    .map(|g| named_set(&names, g))
                    .collect::<Result<Vec<_>, _>>()?;
                let curve = match curve {
                    CurveSpec::Harmonic => Curve::Harmonic,
                    CurveSpec::Explicit { values } => Curve::Explicit(values.clone()),
                };
                Valuation::additive_groups(names.clone(), groups, curve)?
            }
            ValuationSpec::CategoryMax {
                categories,
                item_values,
            } => {
                let categories = categories
                    .iter()
                    .map(|c| named_set(&names, c))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut values = vec![None; names.len()];
                for (name, value) in item_values {
                    let id = named_set(&names, std::slice::from_ref(name))?
                        .first()
                        .expect("one item");
                    values[id] = Some(value.clone());
                }
                let values = values
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| v.ok_or_else(|| ValuationError::MissingEntry(names[i].clone())))
                    .collect::<Result<Vec<_>, _>>()?;
                Valuation::category_max(names.clone(), categories, values)?
            }
        };
        let vendors = self
            .vendors
            .iter()
            .map(|a| named_set(&names, a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((v, vendors))
    }

    /// A game whose valuation passes the soundness check.
    pub fn to_game(&self) -> Result<GameInstance, SchemaError> {
        let (v, vendors) = self.build()?;
        Ok(GameInstance::new(v, vendors)?)
    }

    /// Describes `g` in its own structured form.
    pub fn from_game(g: &GameInstance) -> Self {
        let names = g.names();
        let sets = |list: &[ItemSet]| -> Vec<Vec<String>> {
            list.iter()
                .map(|s| s.iter().map(|i| names[i].clone()).collect())
                .collect()
        };
        let valuation = match g.valuation().kind() {
            ValuationKind::Table { values } => ValuationSpec::Table {
                entries: values
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(mask, v)| (set_key(ItemSet::from_bits(mask as u32), names), v.clone()))
                    .collect(),
            },
            ValuationKind::AdditiveGroups { groups, curve, points, .. } => ValuationSpec::AdditiveGroups {
                groups: sets(groups),
                curve: match curve {
                    Curve::Harmonic => CurveSpec::Harmonic,
                    Curve::Explicit(_) => CurveSpec::Explicit { values: points.clone() },
                },
            },
            ValuationKind::CategoryMax {
                categories,
                item_values,
                ..
            } => ValuationSpec::CategoryMax {
                categories: sets(categories),
                item_values: names.iter().cloned().zip(item_values.iter().cloned()).collect(),
            },
        };
        let vendors = sets(g.vendors());
        let in_vendor_order: Vec<&String> = vendors.iter().flatten().collect();
        let items = (in_vendor_order != names.iter().collect::<Vec<_>>()).then(|| names.to_vec());
        InstanceFile {
            items,
            valuation,
            vendors,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

/// One row of a payoff table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffRow {
    pub profile: String,
    pub payoffs: Vec<Rational>,
    pub sold: String,
    pub welfare: Rational,
}

pub fn payoff_rows(g: &GameInstance, table: &[(StrategyProfile, Outcome)]) -> Vec<PayoffRow> {
    table
        .iter()
        .map(|(s, out)| PayoffRow {
            profile: s.display(g.names()).to_string(),
            payoffs: out.vendor_payoffs.clone(),
            sold: out.sold.display(g.names()).to_string(),
            welfare: out.welfare.clone(),
        })
        .collect()
}

/// CSV with header `profile,u1,...,uk`.
pub fn payoff_csv(k: usize, rows: &[PayoffRow]) -> Result<String, SchemaError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["profile".to_string()];
    header.extend((1..=k).map(|i| format!("u{i}")));
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.profile.clone()];
        record.extend(row.payoffs.iter().map(Rational::to_string));
        w.write_record(&record)?;
    }
    let bytes = w.into_inner().map_err(|e| SchemaError::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

/// Reads a payoff CSV written by [`payoff_csv`] into `profile -> payoffs`.
pub fn read_payoff_csv(text: &str) -> Result<BTreeMap<String, Vec<Rational>>, SchemaError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let mut fields = record.iter();
        let profile = fields
            .next()
            .ok_or_else(|| SchemaError::Invalid(format!("row {}: empty record", line + 2)))?
            .to_string();
        let payoffs = fields
            .map(|f| f.parse::<Rational>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| SchemaError::Invalid(format!("row {}: {e}", line + 2)))?;
        if out.insert(profile.clone(), payoffs).is_some() {
            return Err(SchemaError::Invalid(format!("row {}: duplicate profile {profile}", line + 2)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumEntry {
    pub profile: String,
    pub welfare: Rational,
}

/// [`EquilibriumReport`] with named profiles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    pub equilibria: Vec<EquilibriumEntry>,
    pub optimal_welfare: Rational,
    /// A ratio, or `"undefined (no pure NE)"`.
    pub poa: String,
    pub pos: String,
    pub m: usize,
    #[serde(rename = "bound_Hm_plus_1")]
    pub bound_hm_plus_1: Rational,
    pub bound_satisfied: bool,
}

const UNDEFINED: &str = "undefined (no pure NE)";

impl ReportFile {
    pub fn new(g: &GameInstance, report: &EquilibriumReport) -> Self {
        let ratio = |r: &Option<Rational>| r.as_ref().map_or(UNDEFINED.to_string(), Rational::to_string);
        ReportFile {
            equilibria: report
                .equilibria
                .iter()
                .map(|(s, w)| EquilibriumEntry {
                    profile: s.display(g.names()).to_string(),
                    welfare: w.clone(),
                })
                .collect(),
            optimal_welfare: report.optimal_welfare.clone(),
            poa: ratio(&report.poa),
            pos: ratio(&report.pos),
            m: report.m,
            bound_hm_plus_1: report.bound_hm_plus_1.clone(),
            bound_satisfied: report.bound_satisfied,
        }
    }

    /// Rebuilds the report for `g`.
    pub fn to_report(&self, g: &GameInstance) -> Result<EquilibriumReport, SchemaError> {
        let ratio = |s: &str| -> Result<Option<Rational>, SchemaError> {
            if s == UNDEFINED {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|e| SchemaError::Invalid(format!("{e}")))
            }
        };
        Ok(EquilibriumReport {
            equilibria: self
                .equilibria
                .iter()
                .map(|e| Ok((StrategyProfile::parse(g, &e.profile)?, e.welfare.clone())))
                .collect::<Result<_, SchemaError>>()?,
            optimal_welfare: self.optimal_welfare.clone(),
            poa: ratio(&self.poa)?,
            pos: ratio(&self.pos)?,
            m: self.m,
            bound_hm_plus_1: self.bound_hm_plus_1.clone(),
            bound_satisfied: self.bound_satisfied,
        })
    }
}

/// An inequality check with the vendor named 1-based.
pub fn inequality_json(c: &InequalityCheck) -> serde_json::Value {
    serde_json::json!({
        "vendor": c.vendor.map(|i| i + 1),
        "lhs": c.lhs,
        "rhs": c.rhs,
        "slack": c.slack,
        "holds": c.holds,
    })
}

/// `{"a": "2.601", ...}` in item order.
pub fn named_prices(g: &GameInstance, p: &PriceVector) -> IndexMap<String, Rational> {
    g.names().iter().cloned().zip(p.as_slice().iter().cloned()).collect()
}

/// Parses `a=2.601,b=8.6045`; unspecified items get `default`.
pub fn parse_prices(g: &GameInstance, text: &str, default: &Rational) -> Result<PriceVector, SchemaError> {
    let mut prices = vec![default.clone(); g.n()];
    let mut given = ItemSet::EMPTY;
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| SchemaError::Invalid(format!("expected item=price, got {part:?}")))?;
        let id = g
            .valuation()
            .item_id(name.trim())
            .ok_or_else(|| ValuationError::UnknownItem(name.trim().to_string()))?;
        if given.contains(id) {
            return Err(ValuationError::DuplicateItem(name.trim().to_string()).into());
        }
        given = given.with(id);
        prices[id] = value
            .trim()
            .parse()
            .map_err(|e| SchemaError::Invalid(format!("price of {}: {e}", name.trim())))?;
    }
    Ok(PriceVector::new(prices)?)
}

fn state_json(g: &GameInstance, state: &DynamicsState) -> (&'static str, serde_json::Value) {
    match state {
        DynamicsState::Profile(s) => ("profile", serde_json::Value::String(s.display(g.names()).to_string())),
        DynamicsState::Prices(p) => ("prices", serde_json::to_value(named_prices(g, p)).expect("prices serialize")),
    }
}

/// One JSON object per line: the start state (step 0), every move, then the
/// termination status.
pub fn trace_json_lines(g: &GameInstance, trace: &DynamicsTrace) -> String {
    let mut out = String::new();
    let (key, start) = state_json(g, &trace.start);
    let mut first = serde_json::json!({"step": 0, "turn": null, "vendor": null, "payoffs": trace.start_payoffs});
    first[key] = start;
    out.push_str(&first.to_string());
    out.push('\n');
    for (n, step) in trace.steps.iter().enumerate() {
        let (key, state) = state_json(g, &step.state);
        let mut line = serde_json::json!({
            "step": n + 1,
            "turn": step.turn,
            "vendor": step.vendor + 1,
            "payoffs": step.payoffs,
        });
        line[key] = state;
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&trace.termination).expect("termination serializes"));
    out.push('\n');
    out
}

pub fn termination_text(t: &Termination) -> String {
    match t {
        Termination::Converged => "converged".to_string(),
        Termination::Cycle { period } => format!("cycle of period {period}"),
        Termination::StepCap => "step cap reached".to_string(),
    }
}
