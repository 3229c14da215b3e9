//! MacKay alist text format.
//!
//! ```text
//! n m
//! max_var_degree max_check_degree
//! <n variable degrees>
//! <m check degrees>
//! <n lines: 1-based check indices of each variable>
//! <m lines: 1-based variable indices of each check>
//! ```

use std::fmt::Write as _;

use super::code::LdpcCode;
use crate::error::{Error, Result};

pub fn save_alist(code: &LdpcCode) -> String {
    let n = code.n();
    let m = code.m();
    let var_checks: Vec<Vec<usize>> = (0..n).map(|v| code.var_checks(v)).collect();
    let max_v = var_checks.iter().map(Vec::len).max().unwrap_or(0);
    let max_c = (0..m).map(|j| code.check_degree(j)).max().unwrap_or(0);
    let join = |it: &mut dyn Iterator<Item = usize>| it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{max_v} {max_c}");
    let _ = writeln!(out, "{}", join(&mut var_checks.iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut (0..m).map(|j| code.check_degree(j))));
    for row in &var_checks {
        let _ = writeln!(out, "{}", join(&mut row.iter().map(|c| c + 1)));
    }
    for j in 0..m {
        let _ = writeln!(out, "{}", join(&mut code.check_vars(j).iter().map(|&v| v as usize + 1)));
    }
    out
}

pub fn load_alist(text: &str) -> Result<LdpcCode> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| -> Result<(usize, Vec<usize>)> {
        let (no, line) = lines.next().ok_or_else(|| err(0, format!("unexpected end of input, expected {what}")))?;
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| err(no, format!("`{t}` is not a nonnegative integer"))))
            .collect::<Result<Vec<_>>>()?;
        Ok((no, nums))
    };

    let (no, header) = next("`n m`")?;
    let [n, m] = header[..] else { return Err(err(no, "expected `n m`".into())) };
    let (no, maxes) = next("max degrees")?;
    let [max_v, max_c] = maxes[..] else { return Err(err(no, "expected two max degrees".into())) };
    let (var_line, var_deg) = next("variable degrees")?;
    expect_len(var_line, &var_deg, n, "variable degrees")?;
    let (no, check_deg) = next("check degrees")?;
    expect_len(no, &check_deg, m, "check degrees")?;
    if var_deg.iter().copied().max().unwrap_or(0) != max_v {
        return Err(err(var_line, format!("max variable degree {max_v} disagrees with degree list")));
    }
    if check_deg.iter().copied().max().unwrap_or(0) != max_c {
        return Err(err(no, format!("max check degree {max_c} disagrees with degree list")));
    }

    let mut var_rows = Vec::with_capacity(n);
    for (v, &deg) in var_deg.iter().enumerate() {
        let (no, row) = next("variable adjacency")?;
        var_rows.push(parse_row(no, &row, deg, m, &format!("variable {}", v + 1))?);
    }
    let mut check_rows = Vec::with_capacity(m);
    for (j, &deg) in check_deg.iter().enumerate() {
        let (no, row) = next("check adjacency")?;
        check_rows.push((no, parse_row(no, &row, deg, n, &format!("check {}", j + 1))?));
    }
    if let Some((no, _)) = lines.next() {
        return Err(err(no, "trailing data after adjacency lists".into()));
    }

    // Both halves must describe the same edge set.
    let mut from_vars = vec![Vec::new(); m];
    for (v, row) in var_rows.iter().enumerate() {
        for &c in row {
            from_vars[c].push(v);
        }
    }
    for (j, (no, row)) in check_rows.iter().enumerate() {
        let mut sorted = row.clone();
        sorted.sort_unstable();
        if sorted != from_vars[j] {
            return Err(err(*no, format!("check {} adjacency disagrees with the variable lists", j + 1)));
        }
    }
    let checks: Vec<Vec<usize>> = check_rows.into_iter().map(|(_, r)| r).collect();
    LdpcCode::from_checks(n, &checks)
}

fn err(line: usize, reason: String) -> Error {
    Error::Alist { line, reason }
}

fn expect_len(line: usize, v: &[usize], len: usize, what: &str) -> Result<()> {
    if v.len() != len {
        return Err(err(line, format!("expected {len} {what}, found {}", v.len())));
    }
    Ok(())
}

fn parse_row(line: usize, row: &[usize], degree: usize, bound: usize, what: &str) -> Result<Vec<usize>> {
    expect_len(line, row, degree, &format!("entries for {what}"))?;
    let mut out = Vec::with_capacity(row.len());
    for &idx in row {
        if idx == 0 || idx > bound {
            return Err(err(line, format!("index {idx} out of range 1..={bound} for {what}")));
        }
        if out.contains(&(idx - 1)) {
            return Err(err(line, format!("duplicate index {idx} for {what}")));
        }
        out.push(idx - 1);
    }
    Ok(out)
}
