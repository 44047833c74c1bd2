use crate::csp::{AtomicCsp, PartialAssignment};
use crate::error::{Error, Result};
use crate::marking::Marking;
use serde::Serialize;
use std::collections::HashMap;

pub const DEFAULT_STATE_BUDGET: u64 = 1 << 24;

/// The target law restricted to satisfying assignments.
#[derive(Clone, Debug, Serialize)]
pub struct ExactLaw {
    /// Satisfying assignments in lexicographic order.
    pub support: Vec<Vec<u32>>,
    pub pmf: Vec<f64>,
    #[serde(skip)]
    index: HashMap<Vec<u32>, usize>,
}

impl ExactLaw {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn index_of(&self, assignment: &[u32]) -> Option<usize> {
        self.index.get(assignment).copied()
    }

    pub fn prob(&self, assignment: &[u32]) -> f64 {
        self.index_of(assignment).map_or(0.0, |i| self.pmf[i])
    }

    /// Marginal law of variable `v`.
    pub fn marginal(&self, v: usize, domain: usize) -> Vec<f64> {
        let mut out = vec![0.0; domain];
        for (s, p) in self.support.iter().zip(&self.pmf) {
            out[s[v] as usize] += p;
        }
        out
    }

    /// Law of the marked projection, keyed by the full partial assignment.
    pub fn marked_law(&self, m: &Marking) -> HashMap<PartialAssignment, f64> {
        let mut out = HashMap::new();
        for (s, &p) in self.support.iter().zip(&self.pmf) {
            *out.entry(project_marked(s, m)).or_insert(0.0) += p;
        }
        out
    }
}

/// Keeps the values of marked variables and stars the rest.
pub(crate) fn project_marked(s: &[u32], m: &Marking) -> PartialAssignment {
    let mut out = PartialAssignment::all_star(s.len());
    for (v, &x) in s.iter().enumerate() {
        if m.is_marked(v) {
            out.set_raw(v, x);
        }
    }
    out
}

pub fn enumerate_law(csp: &AtomicCsp) -> Result<ExactLaw> {
    enumerate_law_with(csp, DEFAULT_STATE_BUDGET)
}

/// Depth-first enumeration in variable order; a constraint is checked once
/// its highest variable is assigned.
pub fn enumerate_law_with(csp: &AtomicCsp, budget: u64) -> Result<ExactLaw> {
    let n = csp.num_vars();
    let states = csp.vars().iter().try_fold(1u64, |acc, v| acc.checked_mul(v.domain_size() as u64));
    match states {
        Some(s) if s <= budget => {}
        _ => return Err(Error::Budget(format!("state space exceeds {budget} assignments"))),
    }
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, c) in csp.constraints().iter().enumerate() {
        let last = *c.vbl.iter().max().expect("non-empty constraint");
        closes[last].push(ci);
    }
    let mut support = Vec::new();
    let mut weights = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(
        csp: &AtomicCsp,
        closes: &[Vec<usize>],
        v: usize,
        w: f64,
        cur: &mut Vec<u32>,
        support: &mut Vec<Vec<u32>>,
        weights: &mut Vec<f64>,
    ) {
        if v == cur.len() {
            support.push(cur.clone());
            weights.push(w);
            return;
        }
        for q in 0..csp.var(v).domain_size() as u32 {
            cur[v] = q;
            if closes[v].iter().any(|&c| csp.constraint(c).is_falsified_by(cur)) {
                continue;
            }
            rec(csp, closes, v + 1, w * csp.weight(v, q), cur, support, weights);
        }
    }
    rec(csp, &closes, 0, 1.0, &mut cur, &mut support, &mut weights);
    let z: f64 = weights.iter().sum();
    if support.is_empty() || z <= 0.0 {
        return Err(Error::Unsatisfiable("no satisfying assignment".into()));
    }
    let pmf = weights.iter().map(|w| w / z).collect();
    let index = support.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(ExactLaw { support, pmf, index })
}
