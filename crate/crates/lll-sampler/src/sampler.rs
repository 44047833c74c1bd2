//! Coupling from the past with a bounding chain, plus the final extension to
//! unmarked variables.

use crate::csp::{AtomicCsp, PartialAssignment, STAR};
use crate::error::{Error, Result};
use crate::kernels::component::{component_with, Scratch};
use crate::kernels::rejection::{rejection_sampling, DEFAULT_REJECTION_CAP};
use crate::kernels::tape::{Label, Tape, FINAL_TIME};
use crate::kernels::update::{Kernel, StepInfo, StepKind};
use crate::kernels::DEFAULT_TERM_BUDGET;
use crate::marking::{compute_constants, Marking};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub max_horizon: u64,
    pub term_budget: u64,
    pub rejection_cap: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { max_horizon: 1 << 30, term_budget: DEFAULT_TERM_BUDGET, rejection_cap: DEFAULT_REJECTION_CAP }
    }
}

/// Aggregate counters over the updates of one chain run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChainStats {
    pub updates: u64,
    pub safe: u64,
    pub token_false: u64,
    pub refined: u64,
    pub max_component_vars: usize,
    pub terms: u64,
}

impl ChainStats {
    fn record(&mut self, info: &StepInfo) {
        self.updates += 1;
        match info.kind {
            StepKind::Unmarked => {}
            StepKind::Safe => self.safe += 1,
            StepKind::TokenFalse => self.token_false += 1,
            StepKind::Refined => self.refined += 1,
        }
        self.max_component_vars = self.max_component_vars.max(info.component_vars);
        self.terms += info.terms;
    }
}

#[derive(Clone, Debug)]
pub struct ChainRun {
    pub horizon: u64,
    pub final_state: PartialAssignment,
    pub coalesced: bool,
    pub stats: ChainStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleRecord {
    pub assignment: Vec<u32>,
    /// Horizon at which the bounding chain coalesced.
    pub horizon_used: u64,
    /// Updates summed over every horizon tried.
    pub wall_steps: u64,
    pub final_attempts: u64,
}

pub struct Sampler<'a> {
    kernel: Kernel<'a>,
    config: SamplerConfig,
}

impl<'a> Sampler<'a> {
    /// Builds the update kernel. The sampling conditions are not checked
    /// here; a marking with `e·α < 1` is required whenever it is non-empty.
    pub fn new(csp: &'a AtomicCsp, marking: &'a Marking, config: SamplerConfig) -> Result<Self> {
        if marking.len() != csp.num_vars() {
            return Err(Error::Contract(format!(
                "marking has length {} but the instance has {} variables",
                marking.len(),
                csp.num_vars()
            )));
        }
        let beta = if marking.count() == 0 { 1.0 } else { compute_constants(csp, marking)?.log_beta.exp() };
        Ok(Self { kernel: Kernel::new(csp, marking, beta, config.term_budget), config })
    }

    pub fn kernel(&self) -> &Kernel<'a> {
        &self.kernel
    }

    pub fn csp(&self) -> &'a AtomicCsp {
        self.kernel.csp()
    }

    pub fn marking(&self) -> &'a Marking {
        self.kernel.marking()
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn scratch(&self) -> Scratch {
        Scratch::for_csp(self.csp())
    }

    pub fn step(&self, scratch: &mut Scratch, state: &mut PartialAssignment, t: i64, tape: &Tape) -> Result<StepInfo> {
        self.kernel.update(scratch, state, t, tape)
    }

    /// No marked variable is `⋆`.
    pub fn is_coalesced(&self, state: &PartialAssignment) -> bool {
        let m = self.marking();
        (0..state.len()).all(|v| !m.is_marked(v) || !state.is_star(v))
    }

    /// Runs the bounding chain from the all-`⋆` state over `t = -T..-1`.
    pub fn bounding_chain(&self, horizon: u64, seed: u64) -> Result<ChainRun> {
        let tape = Tape::new(seed);
        let mut scratch = self.scratch();
        let mut state = PartialAssignment::all_star(self.csp().num_vars());
        let mut stats = ChainStats::default();
        if self.csp().num_vars() > 0 {
            for t in -(horizon as i64)..0 {
                let info = self.step(&mut scratch, &mut state, t, &tape)?;
                stats.record(&info);
            }
        }
        let coalesced = self.is_coalesced(&state);
        Ok(ChainRun { horizon, final_state: state, coalesced, stats })
    }

    /// Doubles the horizon from 1 until the bounding chain coalesces, then
    /// extends to the unmarked variables.
    pub fn sample(&self, seed: u64) -> Result<SampleRecord> {
        let mut horizon = 1u64;
        let mut wall_steps = 0u64;
        let run = loop {
            let run = self.bounding_chain(horizon, seed)?;
            wall_steps += horizon;
            if run.coalesced {
                break run;
            }
            horizon *= 2;
            if horizon > self.config.max_horizon {
                return Err(Error::Budget(format!(
                    "no coalescence within horizon {}",
                    self.config.max_horizon
                )));
            }
        };
        let (assignment, final_attempts) = self.final_sampling(&run.final_state, seed)?;
        Ok(SampleRecord { assignment, horizon_used: horizon, wall_steps, final_attempts })
    }

    /// Completes a coalesced marked state by rejection sampling each
    /// component of unmarked variables. Returns the assignment and the total
    /// number of rejection attempts.
    pub fn final_sampling(&self, sigma: &PartialAssignment, seed: u64) -> Result<(Vec<u32>, u64)> {
        let csp = self.csp();
        let m = self.marking();
        let n = csp.num_vars();
        if sigma.len() != n {
            return Err(Error::Contract("final_sampling: state has the wrong length".into()));
        }
        for v in 0..n {
            if m.is_marked(v) == sigma.is_star(v) {
                return Err(Error::Contract(format!(
                    "final_sampling: variable {v} must be {}",
                    if m.is_marked(v) { "fixed" } else { "⋆" }
                )));
            }
        }
        let tape = Tape::new(seed);
        let mut scratch = self.scratch();
        let mut out: Vec<u32> = sigma.values().to_vec();
        let mut attempts = 0;
        for v in 0..n {
            if out[v] != STAR {
                continue;
            }
            let comp = component_with(&mut scratch, csp, m, sigma, v)?;
            if !comp.token {
                return Err(Error::Invariant(format!("final component of variable {v} has Token=False")));
            }
            let mut stream = tape.stream(FINAL_TIME, Label::Rejection, v as u64);
            let res = rejection_sampling(csp, &comp.vars, &comp.constraints, &mut stream, self.config.rejection_cap)?;
            attempts += res.attempts;
            for (&x, &q) in comp.vars.iter().zip(&res.values) {
                out[x] = q;
            }
        }
        if !csp.is_satisfying(&out) {
            return Err(Error::Invariant("emitted assignment violates a constraint".into()));
        }
        Ok((out, attempts))
    }

    /// Applies the coupled update to a concrete marked state over
    /// `t = -steps..-1`, the same times the bounding chain of horizon
    /// `steps` uses.
    pub fn systematic_scan(&self, sigma_in: &PartialAssignment, steps: u64, seed: u64) -> Result<PartialAssignment> {
        self.systematic_scan_from(sigma_in, -(steps as i64), steps, seed)
    }

    pub fn systematic_scan_from(
        &self,
        sigma_in: &PartialAssignment,
        start: i64,
        steps: u64,
        seed: u64,
    ) -> Result<PartialAssignment> {
        let m = self.marking();
        for v in 0..sigma_in.len() {
            if m.is_marked(v) == sigma_in.is_star(v) {
                return Err(Error::Contract(format!(
                    "systematic_scan: variable {v} must be {}",
                    if m.is_marked(v) { "fixed" } else { "⋆" }
                )));
            }
        }
        let tape = Tape::new(seed);
        let mut scratch = self.scratch();
        let mut state = sigma_in.clone();
        if self.csp().num_vars() > 0 {
            for t in start..start + steps as i64 {
                self.step(&mut scratch, &mut state, t, &tape)?;
            }
        }
        Ok(state)
    }
}
