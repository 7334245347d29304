use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;

use papir_core::analysis::{PrivacyVerdict, RateReport};
use papir_core::net::FetchOutcome;
use papir_core::rational::{exact, pretty};
use papir_core::{Dataset, DemandModel, Rational, RcsPolicy, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Kv,
}

fn kv(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn csv(pairs: &[(&str, String)]) -> String {
    let keys: Vec<&str> = pairs.iter().map(|(k, _)| *k).collect();
    let values: Vec<&str> = pairs.iter().map(|(_, v)| v.as_str()).collect();
    format!("{}\n{}\n", keys.join(","), values.join(","))
}

fn human(pairs: &[(&str, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    pairs
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn record(pairs: &[(&str, String)], format: Format) -> String {
    match format {
        Format::Human => human(pairs),
        Format::Csv => csv(pairs),
        Format::Kv => kv(pairs),
    }
}

pub fn rates(r: &RateReport, format: Format) -> String {
    if format != Format::Human {
        return record(&r.fields(), format);
    }
    human(&[
        ("K", r.k.to_string()),
        ("M", r.m.to_string()),
        ("rate upper bound", pretty(&r.r_ub)),
        ("RCS rate (lower bound)", pretty(&r.r_lb)),
        ("MDS rate", pretty(&r.r_mds)),
        ("expected download", pretty(&r.expected_download_units)),
        ("worst-case download", pretty(&r.worst_case_download_units)),
        ("base selection probability", pretty(&r.base_gamma)),
    ])
}

pub fn verdict(v: &PrivacyVerdict, format: Format) -> String {
    match format {
        Format::Kv => v.to_kv(),
        Format::Csv => {
            let mut out = String::from("query,W,posterior,prior\n");
            for x in &v.violations {
                let _ = writeln!(
                    out,
                    "\"{}\",{},{},{}",
                    x.query,
                    x.demand,
                    exact(&x.posterior),
                    exact(&x.prior)
                );
            }
            out
        }
        Format::Human => {
            let mut out = human(&[
                ("policy", v.policy.to_string()),
                (
                    "verdict",
                    if v.passed { "private" } else { "NOT private" }.to_string(),
                ),
                ("query values", v.query_values.to_string()),
                ("total probability", pretty(&v.total_probability)),
                ("violations", v.violations.len().to_string()),
            ]);
            for x in v.violations.iter().take(20) {
                let _ = writeln!(
                    out,
                    "  Q={}  W={}  posterior {}  prior {}",
                    x.query,
                    x.demand,
                    pretty(&x.posterior),
                    pretty(&x.prior)
                );
            }
            if v.violations.len() > 20 {
                let _ = writeln!(out, "  ... {} more", v.violations.len() - 20);
            }
            out
        }
    }
}

/// Rows of (W id, sorted S ids, Gamma), ordered by message id.
fn gamma_rows(model: &DemandModel) -> Result<Vec<(usize, Vec<usize>, Rational)>> {
    let table = RcsPolicy::tabulate(model)?;
    let profile = model.profile();
    let mut rows: Vec<_> = table
        .gamma
        .into_iter()
        .map(|((w, s), g)| {
            let mut ids: Vec<usize> = s.iter().map(|&r| profile.original_index(r)).collect();
            ids.sort_unstable();
            (profile.original_index(w), ids, g)
        })
        .collect();
    rows.sort();
    Ok(rows)
}

fn join(ids: &[usize], sep: &str) -> String {
    ids.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

pub fn gamma_table(model: &DemandModel, format: Format) -> Result<String> {
    let rows = gamma_rows(model)?;
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("W,S,gamma\n");
            for (w, s, g) in &rows {
                let _ = writeln!(out, "{w},{},{}", join(s, ";"), exact(g));
            }
        }
        Format::Kv => {
            for (w, s, g) in &rows {
                let _ = writeln!(out, "gamma.{w}.{}={}", join(s, "-"), exact(g));
            }
        }
        Format::Human => {
            let width = rows
                .iter()
                .map(|(_, s, _)| join(s, ",").len())
                .max()
                .unwrap_or(1)
                + 2;
            let _ = writeln!(out, "{:>4}  {:<width$}  gamma", "W", "S");
            for (w, s, g) in &rows {
                let _ = writeln!(
                    out,
                    "{w:>4}  {:<width$}  {}",
                    format!("{{{}}}", join(s, ",")),
                    pretty(g)
                );
            }
        }
    }
    Ok(out)
}

pub fn simulate_summary(rows: usize, path: &Path, format: Format) -> String {
    record(
        &[
            ("rows", rows.to_string()),
            ("csv", path.display().to_string()),
        ],
        format,
    )
}

pub fn fetch(demand: usize, o: &FetchOutcome, format: Format) -> String {
    let values: Vec<String> = o.value.values().iter().map(u64::to_string).collect();
    record(
        &[
            ("W", demand.to_string()),
            ("scheme", o.scheme.to_string()),
            ("upload_bytes", o.upload_bytes.to_string()),
            ("download_bytes", o.download_bytes.to_string()),
            ("value", values.join(" ")),
        ],
        format,
    )
}

pub fn gen_summary(data: &Dataset, path: &Path, side: Option<&Path>, format: Format) -> String {
    let mut pairs = vec![
        ("K", data.k().to_string()),
        ("n", data.n().to_string()),
        ("field", data.field().order().to_string()),
        ("dataset", path.display().to_string()),
    ];
    if let Some(p) = side {
        pairs.push(("side_info", p.display().to_string()));
    }
    record(&pairs, format)
}
