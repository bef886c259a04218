use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use pmvc_core::pmvc::pmvc_welfare;
use pmvc_core::schema::{
    inequality_json, named_prices, parse_prices, payoff_csv, payoff_rows, read_payoff_csv, termination_text,
    trace_json_lines, ReportFile,
};
use pmvc_core::vcgame::{vc_best_response_capped, vc_verify_ne_capped};
use pmvc_core::*;
use serde_json::json;

use crate::input;
use crate::{Format, Options, Report};

fn payoff_tuple(payoffs: &[Rational]) -> String {
    let parts: Vec<String> = payoffs.iter().map(Rational::to_string).collect();
    format!("({})", parts.join(", "))
}

fn set_text(s: ItemSet, names: &[String]) -> String {
    if s.is_empty() {
        "∅".to_string()
    } else {
        s.display(names).to_string()
    }
}

fn price_list(g: &GameInstance, items: impl IntoIterator<Item = (usize, Rational)>) -> String {
    items
        .into_iter()
        .map(|(a, p)| format!("{}={p}", g.names()[a]))
        .collect::<Vec<_>>()
        .join(", ")
}

fn json_line(value: serde_json::Value) -> String {
    let mut out = serde_json::to_string_pretty(&value).expect("JSON value serializes");
    out.push('\n');
    out
}

fn no_csv(command: &str) -> anyhow::Error {
    anyhow::anyhow!("{command} has no CSV output; use --format text or json")
}

fn witness_text(w: &Witness, names: &[String]) -> String {
    match w {
        Witness::Monotone { set, item, marginal } => format!(
            "({}, {}): m = {marginal} < 0",
            set_text(*set, names),
            names[*item]
        ),
        Witness::Submodular {
            smaller,
            larger,
            item,
            marginal_smaller,
            marginal_larger,
        } => format!(
            "({}, {}, {}): {marginal_smaller} < {marginal_larger}",
            set_text(*smaller, names),
            set_text(*larger, names),
            names[*item]
        ),
    }
}

fn witness_json(w: &Witness, names: &[String]) -> serde_json::Value {
    let set = |s: &ItemSet| s.display(names).to_string();
    match w {
        Witness::Monotone { set: s, item, marginal } => json!({
            "set": set(s),
            "item": names[*item],
            "marginal": marginal,
        }),
        Witness::Submodular {
            smaller,
            larger,
            item,
            marginal_smaller,
            marginal_larger,
        } => json!({
            "smaller": set(smaller),
            "larger": set(larger),
            "item": names[*item],
            "marginal_smaller": marginal_smaller,
            "marginal_larger": marginal_larger,
        }),
    }
}

pub fn check(opts: &Options, path: Option<&PathBuf>) -> Result<Report> {
    let v = match (path, &opts.gen) {
        (Some(_), Some(_)) => bail!("give either an instance file or --gen, not both"),
        (None, None) => bail!("no instance: give a file or --gen NAME:ARGS"),
        (Some(path), None) => {
            let file = input::read_instance_file(path)?;
            file.build().with_context(|| format!("building {}", path.display()))?.0
        }
        (None, Some(spec)) => spec.build(opts.seed, opts.eps.as_ref())?.valuation().clone(),
    };
    let names = v.names();
    let checks = [("monotone", v.check_monotone()), ("submodular", v.check_submodular())];
    let pass = checks.iter().all(|(_, r)| r.passed());
    let stdout = match opts.format {
        Format::Text => {
            let mut out = String::new();
            for (name, report) in &checks {
                match report {
                    ValidationReport::Pass => writeln!(out, "{name}: PASS"),
                    ValidationReport::Fail(w) => writeln!(out, "{name}: FAIL witness {}", witness_text(w, names)),
                }
                .expect("writing to a string");
            }
            out.push_str(if pass { "PASS\n" } else { "FAIL\n" });
            out
        }
        Format::Json => {
            let mut obj = serde_json::Map::new();
            for (name, report) in &checks {
                let entry = match report {
                    ValidationReport::Pass => json!({"verdict": "PASS"}),
                    ValidationReport::Fail(w) => json!({"verdict": "FAIL", "witness": witness_json(w, names)}),
                };
                obj.insert(name.to_string(), entry);
            }
            obj.insert("pass".to_string(), json!(pass));
            json_line(serde_json::Value::Object(obj))
        }
        Format::Csv => return Err(no_csv("check")),
    };
    Ok(Report::verdict(stdout, pass))
}

pub fn gen(opts: &Options, g: &GameInstance) -> Result<Report> {
    if opts.format == Format::Csv {
        return Err(no_csv("gen"));
    }
    let mut out = InstanceFile::from_game(g).to_json();
    out.push('\n');
    Ok(Report::ok(out))
}

fn render_columns(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain([header[c].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}", w = *w))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn table(opts: &Options, g: &GameInstance) -> Result<Report> {
    let rows = payoff_rows(g, &payoff_table(g, opts.cap)?);
    if let Some(path) = &opts.golden {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let golden = read_payoff_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
        let mut out = String::new();
        let mut mismatches = 0;
        for row in &rows {
            match golden.get(&row.profile) {
                Some(want) if *want == row.payoffs => {}
                Some(want) => {
                    mismatches += 1;
                    let _ = writeln!(out, "mismatch {}: got {} want {}", row.profile, payoff_tuple(&row.payoffs), payoff_tuple(want));
                }
                None => {
                    mismatches += 1;
                    let _ = writeln!(out, "missing from golden: {}", row.profile);
                }
            }
        }
        for profile in golden.keys() {
            if !rows.iter().any(|r| &r.profile == profile) {
                mismatches += 1;
                let _ = writeln!(out, "unknown profile in golden: {profile}");
            }
        }
        let _ = if mismatches == 0 {
            writeln!(out, "golden {}: all {} rows match", path.display(), rows.len())
        } else {
            writeln!(out, "golden {}: {mismatches} mismatches", path.display())
        };
        return Ok(Report::verdict(out, mismatches == 0));
    }
    let stdout = match opts.format {
        Format::Csv => payoff_csv(g.k(), &rows)?,
        Format::Json => json_line(serde_json::to_value(&rows)?),
        Format::Text => {
            let header: Vec<String> = ["profile", "payoffs", "sold", "welfare"].map(String::from).to_vec();
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.profile.clone(), payoff_tuple(&r.payoffs), r.sold.clone(), r.welfare.to_string()])
                .collect();
            render_columns(&header, &body)
        }
    };
    Ok(Report::ok(stdout))
}

fn count_line(count: usize) -> String {
    format!("{count} pure Nash equilibri{}", if count == 1 { "um" } else { "a" })
}

pub fn ne(opts: &Options, g: &GameInstance) -> Result<Report> {
    let found = pmvc_pure_ne(g, opts.cap)?;
    let rows: Vec<(String, Vec<Rational>, Rational)> = found
        .iter()
        .map(|s| (s.display(g.names()).to_string(), pmvc_payoffs(g, s), pmvc_welfare(g, s)))
        .collect();
    let stdout = match opts.format {
        Format::Text => {
            let mut out = count_line(rows.len());
            out.push('\n');
            if !rows.is_empty() {
                let header: Vec<String> = ["profile", "payoffs", "welfare"].map(String::from).to_vec();
                let body: Vec<Vec<String>> = rows
                    .iter()
                    .map(|(p, u, w)| vec![p.clone(), payoff_tuple(u), w.to_string()])
                    .collect();
                out.push_str(&render_columns(&header, &body));
            }
            out
        }
        Format::Json => json_line(json!({
            "count": rows.len(),
            "equilibria": rows
                .iter()
                .map(|(p, u, w)| json!({"profile": p, "payoffs": u, "welfare": w}))
                .collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["profile".to_string()];
            header.extend((1..=g.k()).map(|i| format!("u{i}")));
            header.push("welfare".to_string());
            w.write_record(&header)?;
            for (p, u, wf) in &rows {
                let mut record = vec![p.clone()];
                record.extend(u.iter().map(Rational::to_string));
                record.push(wf.to_string());
                w.write_record(&record)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    Ok(Report::ok(stdout))
}

pub fn poa(opts: &Options, g: &GameInstance, lemmas: bool) -> Result<Report> {
    let report = equilibrium_report(g, opts.cap)?;
    let mut pass = report.bound_satisfied;
    let mut per_equilibrium = Vec::new();
    if lemmas {
        for (s, _) in &report.equilibria {
            let first = check_lemma1(g, s)?;
            let second = check_lemma2(g, s)?;
            pass &= first.iter().all(|c| c.holds) && second.holds;
            per_equilibrium.push((s.display(g.names()).to_string(), first, second));
        }
    }
    let stdout = match opts.format {
        Format::Text => {
            let mut out = report.render_text(g.names());
            let mark = |holds: bool| if holds { "holds" } else { "VIOLATED" };
            for (profile, first, second) in &per_equilibrium {
                let _ = writeln!(out, "at {profile}:");
                for c in first {
                    let _ = writeln!(
                        out,
                        "  vendor {}: v(A_i ∪ S_-i) = {} <= v(S_-i) + H_|A_i| (v(S) - v(S_-i)) = {}, slack {}, {}",
                        c.vendor.map_or(0, |i| i + 1),
                        c.lhs,
                        c.rhs,
                        c.slack,
                        mark(c.holds)
                    );
                }
                let _ = writeln!(
                    out,
                    "  sum_i v(A_i ∪ S_-i) = {} >= v(A*) + (k-1) v(S) = {}, slack {}, {}",
                    second.lhs,
                    second.rhs,
                    second.slack,
                    mark(second.holds)
                );
            }
            out
        }
        Format::Json => {
            let mut value = serde_json::to_value(ReportFile::new(g, &report))?;
            if lemmas {
                value["inequalities"] = per_equilibrium
                    .iter()
                    .map(|(profile, first, second)| {
                        json!({
                            "profile": profile,
                            "per_vendor": first.iter().map(inequality_json).collect::<Vec<_>>(),
                            "sum": inequality_json(second),
                        })
                    })
                    .collect();
            }
            json_line(value)
        }
        Format::Csv => return Err(no_csv("poa")),
    };
    Ok(Report::verdict(stdout, pass))
}

fn state_text(g: &GameInstance, state: &DynamicsState) -> String {
    match state {
        DynamicsState::Profile(s) => s.display(g.names()).to_string(),
        DynamicsState::Prices(p) => price_list(g, p.as_slice().iter().cloned().enumerate()),
    }
}

pub fn brd(
    opts: &Options,
    g: &GameInstance,
    start: Option<&str>,
    prices: Option<&str>,
    max_steps: usize,
) -> Result<Report> {
    let start = match (start, prices) {
        (_, Some(text)) => DynamicsState::Prices(parse_prices(g, text, g.sentinel())?),
        (Some(text), None) => DynamicsState::Profile(StrategyProfile::parse(g, text)?),
        (None, None) => DynamicsState::Profile(StrategyProfile::empty(g)),
    };
    let trace = br_dynamics(g, start, opts.method, max_steps)?;
    let stdout = match opts.format {
        Format::Json => trace_json_lines(g, &trace),
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "start {}  payoffs {}", state_text(g, &trace.start), payoff_tuple(&trace.start_payoffs));
            for (n, step) in trace.steps.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "move {}: vendor {} -> {}  payoffs {}",
                    n + 1,
                    step.vendor + 1,
                    state_text(g, &step.state),
                    payoff_tuple(&step.payoffs)
                );
            }
            out.push_str(&termination_text(&trace.termination));
            out.push('\n');
            out
        }
        Format::Csv => return Err(no_csv("brd")),
    };
    Ok(Report::ok(stdout))
}

fn verdict_text(g: &GameInstance, verdict: &Verdict, method: BrMethod) -> String {
    match verdict {
        Verdict::Certified => format!("certified: no vendor can gain ({method})"),
        Verdict::Refuted(cert) => format!(
            "refuted: vendor {} deviates to {} and earns {} > {}",
            cert.vendor + 1,
            price_list(g, cert.deviation_prices.iter().cloned()),
            cert.new_revenue,
            cert.old_revenue
        ),
        Verdict::NotRefuted if method.is_exact() => {
            "not refuted: some vendor's revenue supremum exceeds its revenue but is not attained".to_string()
        }
        Verdict::NotRefuted => format!("not refuted: {method} search is not exhaustive"),
    }
}

fn verdict_json(g: &GameInstance, verdict: &Verdict) -> serde_json::Value {
    match verdict {
        Verdict::Certified => json!({"verdict": "certified"}),
        Verdict::NotRefuted => json!({"verdict": "not-refuted"}),
        Verdict::Refuted(cert) => json!({
            "verdict": "refuted",
            "vendor": cert.vendor + 1,
            "deviation_prices": cert
                .deviation_prices
                .iter()
                .map(|(a, p)| (g.names()[*a].clone(), json!(p)))
                .collect::<serde_json::Map<_, _>>(),
            "old_revenue": cert.old_revenue,
            "new_revenue": cert.new_revenue,
            "method": cert.method.to_string(),
        }),
    }
}

pub fn cdsp(opts: &Options, g: &GameInstance, verify: bool) -> Result<Report> {
    let eq = cdsp_equilibrium(g)?;
    let names = g.names();
    let outcome = settle(g, eq.prices.clone());
    let checked = if verify {
        let verdict = vc_verify_ne_capped(g, &eq.prices, opts.method, opts.cap)?;
        let optimal = outcome.welfare == g.valuation().grand_value();
        Some((verdict, optimal))
    } else {
        None
    };
    let pass = checked
        .as_ref()
        .is_none_or(|(verdict, optimal)| *verdict == Verdict::Certified && *optimal);
    let stdout = match opts.format {
        Format::Text => {
            let mut out = String::new();
            for c in &eq.categories {
                let _ = writeln!(
                    out,
                    "category {}: winner vendor {} with {}, runner-up value {}, price {}",
                    c.category.display(names),
                    c.winner + 1,
                    names[c.winning_item],
                    c.runner_up_value,
                    eq.prices.get(c.winning_item)
                );
            }
            let _ = writeln!(out, "prices: {}", price_list(g, eq.prices.as_slice().iter().cloned().enumerate()));
            let _ = writeln!(out, "bought {}, payoffs {}", outcome.sold.display(names), payoff_tuple(&outcome.vendor_payoffs));
            let _ = writeln!(out, "welfare {} of optimal {}", outcome.welfare, g.valuation().grand_value());
            if let Some((verdict, optimal)) = &checked {
                let _ = writeln!(out, "{}", verdict_text(g, verdict, opts.method));
                if pass {
                    out.push_str("equilibrium certified; welfare optimal\n");
                } else if !optimal {
                    out.push_str("welfare NOT optimal\n");
                }
            }
            out
        }
        Format::Json => {
            let mut value = json!({
                "prices": named_prices(g, &eq.prices),
                "categories": eq.categories.iter().map(|c| json!({
                    "category": c.category.display(names).to_string(),
                    "winner": c.winner + 1,
                    "winning_item": names[c.winning_item],
                    "runner_up_value": c.runner_up_value,
                    "best_items": c.best_items.iter().map(|(i, a)| json!({"vendor": i + 1, "item": names[*a]})).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "bought": outcome.sold.display(names).to_string(),
                "payoffs": outcome.vendor_payoffs,
                "welfare": outcome.welfare,
                "optimal_welfare": g.valuation().grand_value(),
            });
            if let Some((verdict, optimal)) = &checked {
                value["verification"] = verdict_json(g, verdict);
                value["welfare_optimal"] = json!(optimal);
            }
            json_line(value)
        }
        Format::Csv => return Err(no_csv("cdsp")),
    };
    Ok(Report::verdict(stdout, pass))
}

fn vendor_index(g: &GameInstance, vendor: usize) -> Result<usize> {
    if vendor == 0 || vendor > g.k() {
        bail!("vendor {vendor} out of range 1..={}", g.k());
    }
    Ok(vendor - 1)
}

pub fn bestresp(opts: &Options, g: &GameInstance, vendor: usize, prices: &str) -> Result<Report> {
    let i = vendor_index(g, vendor)?;
    let p = parse_prices(g, prices, g.sentinel())?;
    let br = vc_best_response_capped(g, i, &p, opts.method, opts.cap)?;
    let own = br.own_prices(g);
    let stdout = match opts.format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "vendor {vendor} best response ({})", br.method);
            let _ = writeln!(out, "prices: {}", price_list(g, own));
            let _ = writeln!(out, "revenue {}", br.revenue);
            if let Some(sup) = &br.supremum {
                let note = if *sup == br.revenue { "" } else { " (not attained)" };
                let _ = writeln!(out, "supremum {sup}{note}");
            }
            let _ = writeln!(out, "sold {}", br.sold.display(g.names()));
            out
        }
        Format::Json => json_line(json!({
            "vendor": vendor,
            "method": br.method.to_string(),
            "prices": own.iter().map(|(a, p)| (g.names()[*a].clone(), json!(p))).collect::<serde_json::Map<_, _>>(),
            "revenue": br.revenue,
            "supremum": br.supremum,
            "sold": br.sold.display(g.names()).to_string(),
        })),
        Format::Csv => return Err(no_csv("bestresp")),
    };
    Ok(Report::ok(stdout))
}

pub fn verify(opts: &Options, g: &GameInstance, prices: Option<&str>, profile: Option<&str>) -> Result<Report> {
    let p = match (prices, profile) {
        (Some(text), _) => parse_prices(g, text, g.sentinel())?,
        (None, Some(text)) => pmvc_prices(g, &StrategyProfile::parse(g, text)?)?,
        (None, None) => bail!("give --prices or --profile"),
    };
    let verdict = vc_verify_ne_capped(g, &p, opts.method, opts.cap)?;
    let mapping = map_to_pmvc(g, &p)?;
    let refuted = matches!(verdict, Verdict::Refuted(_));
    let stdout = match opts.format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "{}", verdict_text(g, &verdict, opts.method));
            let _ = writeln!(
                out,
                "bought {}; mechanism profile {} gives payoffs {} (change {})",
                mapping.sold.display(g.names()),
                mapping.profile.display(g.names()),
                payoff_tuple(&mapping.pmvc_payoffs),
                payoff_tuple(&mapping.deltas)
            );
            out
        }
        Format::Json => {
            let mut value = verdict_json(g, &verdict);
            value["mapping"] = json!({
                "profile": mapping.profile.display(g.names()).to_string(),
                "sold": mapping.sold.display(g.names()).to_string(),
                "payoffs": mapping.vc_payoffs,
                "mechanism_payoffs": mapping.pmvc_payoffs,
                "deltas": mapping.deltas,
                "sold_preserved": mapping.sold_preserved,
            });
            json_line(value)
        }
        Format::Csv => return Err(no_csv("verify")),
    };
    Ok(Report::verdict(stdout, !refuted))
}
