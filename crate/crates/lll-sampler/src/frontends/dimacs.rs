use super::naming::Naming;
use crate::csp::{AtomicConstraint, AtomicCsp, VariableSpec};
use crate::error::{Error, Result};
use std::fmt::Write;

/// A parsed CNF plus notes about clauses that were dropped.
#[derive(Clone, Debug)]
pub struct DimacsInstance {
    pub csp: AtomicCsp,
    pub warnings: Vec<String>,
}

impl DimacsInstance {
    pub fn naming(&self) -> Naming {
        Naming::boolean(self.csp.num_vars())
    }
}

pub fn parse_dimacs(text: &str) -> Result<AtomicCsp> {
    parse_dimacs_with_warnings(text).map(|d| d.csp)
}

/// Clause `(l1 ∨ … ∨ lk)` becomes the atomic constraint falsified when every
/// literal is false. Value 1 means true.
pub fn parse_dimacs_with_warnings(text: &str) -> Result<DimacsInstance> {
    let err = |line: usize, msg: String| Error::Parse { line, msg };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses: Vec<(usize, Vec<i64>)> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut current_start = 0;
    let mut warnings = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(lineno, "second problem line".into()));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(err(lineno, format!("expected 'p cnf <vars> <clauses>', got '{line}'")));
            }
            let n = parts[2].parse().map_err(|_| err(lineno, format!("bad variable count '{}'", parts[2])))?;
            let m = parts[3].parse().map_err(|_| err(lineno, format!("bad clause count '{}'", parts[3])))?;
            header = Some((n, m, lineno));
            continue;
        }
        let Some((n, _, _)) = header else {
            return Err(err(lineno, "clause before the problem line".into()));
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| err(lineno, format!("bad literal '{tok}'")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(err(lineno, "empty clause".into()));
                }
                clauses.push((current_start, std::mem::take(&mut current)));
                continue;
            }
            if lit.unsigned_abs() as usize > n {
                return Err(err(lineno, format!("literal {lit} out of range (n = {n})")));
            }
            if current.is_empty() {
                current_start = lineno;
            }
            current.push(lit);
        }
    }
    let Some((n, m, hline)) = header else {
        return Err(err(text.lines().count().max(1), "missing problem line".into()));
    };
    if !current.is_empty() {
        return Err(err(current_start, "clause not terminated by 0".into()));
    }
    if clauses.len() != m {
        return Err(err(hline, format!("header declares {m} clauses but {} were found", clauses.len())));
    }
    let mut constraints = Vec::with_capacity(m);
    for (lineno, mut lits) in clauses {
        lits.sort_by_key(|l| (l.unsigned_abs(), *l));
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == -w[1]) {
            warnings.push(format!("line {lineno}: tautological clause dropped"));
            continue;
        }
        let vbl = lits.iter().map(|l| l.unsigned_abs() as usize - 1).collect();
        let falsifying = lits.iter().map(|&l| u32::from(l < 0)).collect();
        constraints.push(AtomicConstraint::new(vbl, falsifying));
    }
    let csp = AtomicCsp::new(vec![VariableSpec::uniform(2); n], constraints)?;
    Ok(DimacsInstance { csp, warnings })
}

/// Emits a CSP over binary variables as CNF. Weights are not representable
/// and are ignored.
pub fn emit_dimacs(csp: &AtomicCsp) -> Result<String> {
    if let Some(v) = (0..csp.num_vars()).find(|&v| csp.var(v).domain_size() != 2) {
        return Err(Error::InvalidInstance(format!("variable {v} is not binary")));
    }
    let mut out = format!("p cnf {} {}\n", csp.num_vars(), csp.num_constraints());
    for c in csp.constraints() {
        for (v, f) in c.iter() {
            let lit = v as i64 + 1;
            write!(out, "{} ", if f == 0 { lit } else { -lit }).unwrap();
        }
        out.push_str("0\n");
    }
    Ok(out)
}
