//! Propagation table files.
//!
//! A JSON object keyed by tie set, e.g. `"1,3,H"`, each value mapping a miner
//! (`"1"`, …, `"H"`) to its weights on the tie's branches in key order. Rows of
//! strategic tie members may be omitted; they always mine their own branch.

use std::collections::BTreeMap;
use std::path::Path;

use ssmlab::revenue::{validate_table_entry, PropagationTable};

use crate::error::{CliError, CliResult};

type RawTable = BTreeMap<String, BTreeMap<String, Vec<f64>>>;

pub fn load(path: &Path, miners: usize) -> CliResult<PropagationTable<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text, miners).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}:{m}", path.display())),
        other => other,
    })
}

/// Parses table text for `miners` strategic miners. Errors read `LINE: message`.
pub fn parse(text: &str, miners: usize) -> CliResult<PropagationTable<f64>> {
    let raw: RawTable = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("{}: {e}", e.line())))?;
    let mut entries = BTreeMap::new();
    for (key, rows) in &raw {
        let at = key_offset(text, key, 0);
        let fail = |offset: usize, msg: String| CliError::Input(format!("{}: {msg}", line_of(text, offset)));
        let set = parse_member_list(key, miners).map_err(|m| fail(at, m))?;
        let mut full: Vec<Option<Vec<f64>>> = vec![None; miners + 1];
        for (who, row) in rows {
            let i = parse_member(who, miners).map_err(|m| fail(key_offset(text, who, at), format!("tie set {key}: {m}")))?;
            full[i] = Some(row.clone());
        }
        let mut filled = Vec::with_capacity(miners + 1);
        for (i, row) in full.into_iter().enumerate() {
            match row {
                Some(r) => filled.push(r),
                None if i < miners && set.contains(&i) => {
                    filled.push(set.iter().map(|&j| if j == i { 1.0 } else { 0.0 }).collect())
                }
                None => {
                    return Err(fail(at, format!("tie set {key} has no row for miner {}", label(miners, i))));
                }
            }
        }
        if let Err(m) = validate_table_entry(miners, &set, &filled) {
            let offset = row_offset(text, at, &m, miners);
            return Err(fail(offset, m));
        }
        if entries.insert(set, filled).is_some() {
            return Err(fail(at, format!("tie set {key} appears twice")));
        }
    }
    for set in required_sets(miners) {
        if !entries.contains_key(&set) {
            let names: Vec<String> = set.iter().map(|&i| label(miners, i)).collect();
            return Err(CliError::Input(format!("1: missing entry for tie set \"{}\"", names.join(","))));
        }
    }
    Ok(PropagationTable::new(miners, entries)?)
}

/// Every tie set a chain on `miners` strategic miners can reach.
pub fn required_sets(miners: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1usize..(1 << miners) {
        let members: Vec<usize> = (0..miners).filter(|i| (mask >> i) & 1 == 1).collect();
        if members.len() >= 2 {
            out.push(members.clone());
        }
        let mut with_pool = members;
        with_pool.push(miners);
        out.push(with_pool);
    }
    out
}

fn label(miners: usize, i: usize) -> String {
    if i == miners {
        "H".into()
    } else {
        (i + 1).to_string()
    }
}

fn parse_member(s: &str, miners: usize) -> Result<usize, String> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("h") {
        return Ok(miners);
    }
    match s.parse::<usize>() {
        Ok(i) if (1..=miners).contains(&i) => Ok(i - 1),
        _ => Err(format!("unknown miner {s:?}, expected 1..{miners} or H")),
    }
}

fn parse_member_list(key: &str, miners: usize) -> Result<Vec<usize>, String> {
    let set = key
        .split(',')
        .map(|p| parse_member(p, miners))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|m| format!("tie set {key:?}: {m}"))?;
    if set.len() < 2 {
        return Err(format!("tie set {key:?} needs at least two branches"));
    }
    Ok(set)
}

/// Byte offset of `"needle"` at or after `from`, or `from` if absent.
fn key_offset(text: &str, needle: &str, from: usize) -> usize {
    let quoted = format!("\"{needle}\"");
    text[from..].find(&quoted).map_or(from, |k| from + k)
}

/// Points row-level messages (`miner X:`) at that row's line.
fn row_offset(text: &str, at: usize, msg: &str, miners: usize) -> usize {
    let Some(rest) = msg.split(", miner ").nth(1) else {
        return at;
    };
    let who = rest.split(':').next().unwrap_or("");
    if parse_member(who, miners).is_err() {
        return at;
    }
    key_offset(text, who, at)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}
