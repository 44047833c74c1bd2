use super::component::{component_with, Scratch};
use super::marginal::{exact_component_marginal, DEFAULT_TERM_BUDGET};
use super::safe::SafePmf;
use super::tape::{Label, Tape};
use crate::csp::{AtomicCsp, PartialAssignment, STAR};
use crate::error::{Error, Result};
use crate::marking::{compute_constants, Marking};

/// Slack allowed when asserting `D★(q) ≤ D†(q)` against rounding.
const DOMINANCE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// The scanned variable is unmarked; nothing changes.
    Unmarked,
    /// The layered uniform fell in a `D★(q)` block.
    Safe,
    /// The uniform fell in the `⋆` region and the component touched another
    /// uncertain marked variable.
    TokenFalse,
    /// The uniform fell in the `⋆` region and was resolved by `D†`.
    Refined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepInfo {
    pub kind: StepKind,
    pub component_vars: usize,
    pub terms: u64,
}

/// Precomputed data for the coupled single-site update.
#[derive(Clone, Debug)]
pub struct Kernel<'a> {
    csp: &'a AtomicCsp,
    marking: &'a Marking,
    safe: Vec<SafePmf>,
    budget: u64,
}

impl<'a> Kernel<'a> {
    /// `beta` is the multiplicative bias; it is ignored when nothing is marked.
    pub fn new(csp: &'a AtomicCsp, marking: &'a Marking, beta: f64, budget: u64) -> Self {
        let safe = (0..csp.num_vars())
            .map(|v| {
                if marking.is_marked(v) {
                    SafePmf::from_beta(csp.var(v).weights(), beta)
                } else {
                    SafePmf { values: Vec::new(), star: 1.0 }
                }
            })
            .collect();
        Self { csp, marking, safe, budget }
    }

    pub fn csp(&self) -> &'a AtomicCsp {
        self.csp
    }

    pub fn marking(&self) -> &'a Marking {
        self.marking
    }

    pub fn safe(&self, v: usize) -> &SafePmf {
        &self.safe[v]
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Variable scanned at time `t`.
    pub fn var_at(&self, t: i64) -> usize {
        t.rem_euclid(self.csp.num_vars() as i64) as usize
    }

    /// One coupled update of `state` at time `t`.
    pub fn update(
        &self,
        scratch: &mut Scratch,
        state: &mut PartialAssignment,
        t: i64,
        tape: &Tape,
    ) -> Result<StepInfo> {
        let v = self.var_at(t);
        if !self.marking.is_marked(v) {
            return Ok(StepInfo { kind: StepKind::Unmarked, component_vars: 0, terms: 0 });
        }
        state.set_raw(v, STAR);
        let u0 = tape.draw_uniform(t, Label::Layered, 0);
        let safe = &self.safe[v];
        let mut edge = 0.0;
        for (q, &p) in safe.values.iter().enumerate() {
            edge += p;
            if u0 < edge {
                state.set_raw(v, q as u32);
                return Ok(StepInfo { kind: StepKind::Safe, component_vars: 0, terms: 0 });
            }
        }
        let comp = component_with(scratch, self.csp, self.marking, state, v)?;
        if !comp.token {
            return Ok(StepInfo { kind: StepKind::TokenFalse, component_vars: comp.vars.len(), terms: 0 });
        }
        let marg = exact_component_marginal(self.csp, &comp, v, self.budget)?;
        let mut last_positive = None;
        for (q, (&dag, &star)) in marg.pmf.iter().zip(&safe.values).enumerate() {
            let gap = dag - star;
            if gap < -DOMINANCE_TOL {
                return Err(Error::Regime(format!(
                    "safe mass {star} exceeds the component marginal {dag} at variable {v}, value {q}; \
                     the marking violates e*alpha*Delta <= 1"
                )));
            }
            if gap > 0.0 {
                edge += gap;
                last_positive = Some(q);
                if u0 < edge {
                    state.set_raw(v, q as u32);
                    return Ok(StepInfo {
                        kind: StepKind::Refined,
                        component_vars: comp.vars.len(),
                        terms: marg.terms,
                    });
                }
            }
        }
        let q = last_positive.ok_or_else(|| Error::Invariant(format!("empty refinement at variable {v}")))?;
        state.set_raw(v, q as u32);
        Ok(StepInfo { kind: StepKind::Refined, component_vars: comp.vars.len(), terms: marg.terms })
    }
}

/// Stand-alone coupled update; recomputes the marking constants on each call.
pub fn coupled_update(
    csp: &AtomicCsp,
    m: &Marking,
    state: &PartialAssignment,
    t: i64,
    tape: &Tape,
) -> Result<PartialAssignment> {
    let beta = if m.count() == 0 { 1.0 } else { compute_constants(csp, m)?.log_beta.exp() };
    let kernel = Kernel::new(csp, m, beta, DEFAULT_TERM_BUDGET);
    let mut next = state.clone();
    kernel.update(&mut Scratch::for_csp(csp), &mut next, t, tape)?;
    Ok(next)
}
