//! Side-information files: a `field <q>` line, then `<id>: <v1> <v2> ...`
//! per message. `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use papir_core::{Error, MessageVector, PrimeField, Result, SideInfo};

pub fn parse(text: &str) -> Result<(PrimeField, SideInfo)> {
    let mut field = None;
    let mut side = SideInfo::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("side-information line {}: {what}", i + 1));
        if let Some(q) = line.strip_prefix("field") {
            if field.is_some() {
                return Err(bad("repeated field line"));
            }
            let q = q.trim().parse().map_err(|_| bad("bad field order"))?;
            field = Some(PrimeField::new(q)?);
            continue;
        }
        let f = field.ok_or_else(|| bad("values before the field line"))?;
        let (id, values) = line
            .split_once(':')
            .ok_or_else(|| bad("expected `id: values`"))?;
        let id: usize = id.trim().parse().map_err(|_| bad("bad message id"))?;
        let coords = values
            .split_whitespace()
            .map(|t| {
                let v = t.parse().map_err(|_| bad("bad symbol"))?;
                f.canonical(v)
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(bad("message has no symbols"));
        }
        let x = MessageVector::from_elements(f, coords)?;
        if side.values().next().is_some_and(|y| y.len() != x.len()) {
            return Err(bad("messages differ in length"));
        }
        if side.insert(id, x).is_some() {
            return Err(bad("repeated message id"));
        }
    }
    let field =
        field.ok_or_else(|| Error::Parse("side-information file has no field line".into()))?;
    Ok((field, side))
}

pub fn render(side: &SideInfo, field: PrimeField) -> String {
    let mut out = format!("field {}\n", field.order());
    for (id, x) in side {
        let values: Vec<String> = x.values().iter().map(u64::to_string).collect();
        let _ = writeln!(out, "{id}: {}", values.join(" "));
    }
    out
}

pub fn load(path: &Path) -> Result<(PrimeField, SideInfo)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse(&text)
}

pub fn save(side: &SideInfo, field: PrimeField, path: &Path) -> Result<()> {
    std::fs::write(path, render(side, field)).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
