use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use hashbrown::HashSet;

use super::model::{IlpModel, VarId};

const TERMS_PER_LINE: usize = 8;

/// Restricts `raw` to `[A-Za-z0-9_]`, starting with a letter.
pub fn sanitize_name(raw: &str) -> String {
    let mut out: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if !out.starts_with(|c: char| c.is_ascii_alphabetic()) {
        out.insert_str(0, "v_");
    }
    out
}

fn unique_names<'a>(raw: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut taken = HashSet::new();
    raw.enumerate()
        .map(|(i, name)| {
            let mut name = sanitize_name(name);
            if !taken.insert(name.clone()) {
                name = format!("{name}_{i}");
                while !taken.insert(name.clone()) {
                    name.push('_');
                }
            }
            name
        })
        .collect()
}

fn write_terms(out: &mut String, terms: &[(i64, VarId)], names: &[String]) {
    for (k, &(c, v)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", c.unsigned_abs(), names[v]);
    }
}

/// CPLEX-LP text: `Minimize`, `Subject To`, `Binary`, `End`, one constraint
/// per entry written as `name: + 1 x - 1 y >= 0`. Long rows wrap onto
/// indented continuation lines.
pub fn export_lp(model: &IlpModel) -> String {
    let names = unique_names(model.vars.iter().map(|v| v.name.as_str()));
    let row_names = unique_names(model.constraints.iter().map(|c| c.name.as_str()));
    // Constant rows still need one variable to be well formed.
    let filler = names.first().map(|n| (0i64, n.clone()));

    let mut out = String::from("Minimize\n obj:");
    if model.objective.is_empty() {
        if let Some((_, name)) = &filler {
            let _ = write!(out, " 0 {name}");
        }
    } else {
        write_terms(&mut out, &model.objective, &names);
    }
    out.push_str("\nSubject To\n");
    for (c, row) in model.constraints.iter().zip(&row_names) {
        let _ = write!(out, " {row}:");
        if c.terms.is_empty() {
            match &filler {
                Some((_, name)) => {
                    let _ = write!(out, " 0 {name}");
                }
                None => {
                    out.truncate(out.len() - row.len() - 2);
                    continue;
                }
            }
        } else {
            write_terms(&mut out, &c.terms, &names);
        }
        let _ = writeln!(out, " {} {}", c.relation.symbol(), c.bound);
    }
    out.push_str("Binary\n");
    for name in &names {
        let _ = writeln!(out, " {name}");
    }
    out.push_str("End\n");
    out
}
