use super::law::{project_marked, ExactLaw};
use crate::csp::{AtomicCsp, PartialAssignment, STAR};
use crate::error::Result;
use crate::kernels::component::component_with;
use crate::kernels::rejection::rejection_sampling;
use crate::kernels::tape::{derive_seed, Label, Tape, AUX_TIME};
use crate::marking::Marking;
use crate::par::map_indexed;
use crate::sampler::{Sampler, SamplerConfig};
use serde::Serialize;

/// How the concrete chain is advanced next to the bounding chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScanRule {
    /// The coupled update shared with the bounding chain.
    Coupled,
    /// Resamples the scanned variable from its exact conditional law, but
    /// from a stream the bounding chain never reads. Only useful to show the
    /// checker catches a broken coupling.
    IndependentStreams,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub trials: u64,
    pub horizon: u64,
    /// Steps at which the bounding state failed to cover the concrete one.
    pub violations: u64,
    pub coalesced: u64,
    /// Coalesced trials whose marked states differ.
    pub equality_failures: u64,
    pub first_violation: Option<String>,
    pub pass: bool,
}

struct Trial {
    violations: u64,
    coalesced: bool,
    equal: bool,
    first: Option<String>,
}

/// Runs a concrete chain from the marked projection of an exact solution
/// alongside the bounding chain from all-`⋆`, both over `t = -T..-1` on one
/// tape, and checks containment at every step.
#[allow(clippy::too_many_arguments)]
pub fn check_bounding_invariant(
    csp: &AtomicCsp,
    m: &Marking,
    law: &ExactLaw,
    horizon: u64,
    trials: u64,
    seed: u64,
    rule: ScanRule,
    jobs: usize,
) -> Result<InvariantReport> {
    let sampler = Sampler::new(csp, m, SamplerConfig::default())?;
    let n = csp.num_vars();
    let results = map_indexed(trials as usize, jobs, |i| -> Result<Trial> {
        let tape = Tape::new(derive_seed(seed, i as u64));
        let pick = tape.stream(AUX_TIME, Label::Rejection, 0).pick(&law.pmf);
        let mut real = project_marked(&law.support[pick], m);
        let mut bound = PartialAssignment::all_star(n);
        let mut scratch = sampler.scratch();
        let mut trial = Trial { violations: 0, coalesced: false, equal: false, first: None };
        if n == 0 {
            trial.coalesced = true;
            trial.equal = true;
            return Ok(trial);
        }
        for t in -(horizon as i64)..0 {
            sampler.step(&mut scratch, &mut bound, t, &tape)?;
            match rule {
                ScanRule::Coupled => {
                    sampler.step(&mut scratch, &mut real, t, &tape)?;
                }
                ScanRule::IndependentStreams => independent_step(&sampler, &mut real, t, &tape)?,
            }
            if !bound.covers(&real) {
                trial.violations += 1;
                if trial.first.is_none() {
                    trial.first = Some(format!("trial {i}, t = {t}: {bound:?} does not cover {real:?}"));
                }
            }
        }
        trial.coalesced = sampler.is_coalesced(&bound);
        trial.equal = bound == real;
        Ok(trial)
    });
    let mut report = InvariantReport {
        trials,
        horizon,
        violations: 0,
        coalesced: 0,
        equality_failures: 0,
        first_violation: None,
        pass: false,
    };
    for r in results {
        let t = r?;
        report.violations += t.violations;
        if t.coalesced {
            report.coalesced += 1;
            report.equality_failures += u64::from(!t.equal);
        }
        if report.first_violation.is_none() {
            report.first_violation = t.first;
        }
    }
    report.pass = report.violations == 0 && report.equality_failures == 0;
    Ok(report)
}

fn independent_step(sampler: &Sampler, state: &mut PartialAssignment, t: i64, tape: &Tape) -> Result<()> {
    let kernel = sampler.kernel();
    let v = kernel.var_at(t);
    if !kernel.marking().is_marked(v) {
        return Ok(());
    }
    state.set_raw(v, STAR);
    let mut scratch = sampler.scratch();
    let comp = component_with(&mut scratch, kernel.csp(), kernel.marking(), state, v)?;
    let mut stream = tape.stream(t, Label::Rejection, 0);
    let res = rejection_sampling(kernel.csp(), &comp.vars, &comp.constraints, &mut stream, sampler.config().rejection_cap)?;
    let pos = comp.vars.iter().position(|&x| x == v).expect("focal variable in its component");
    state.set_raw(v, res.values[pos]);
    Ok(())
}
