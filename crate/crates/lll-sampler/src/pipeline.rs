//! End-to-end pipelines: from an input instance to a sampler over a binary
//! (possibly tensorized) CSP with a marking, and back.

use crate::csp::{preprocess, AtomicCsp};
use crate::error::{Error, Result};
use crate::frontends::{build_coloring, HypergraphInstance};
use crate::kernels::tape::derive_seed;
use crate::marking::{
    binary_params, binary_regime, check_theorem_conditions, construct_marking_binary_with,
    construct_marking_uniform_binary_with, repair_marking, uniform_regime, ConditionReport, ConstructOptions,
    Marking, RegimeCheck,
};
use crate::par::map_indexed;
use crate::sampler::{Sampler, SamplerConfig};
use crate::tensorization::{
    coloring_regime, complete_binary_tensorize_with_marking, construct_uniform, huffman_tensorize, tensorize,
    TensorizedCsp,
};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineKind {
    Binary,
    General,
    Uniform,
    Coloring,
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PipelineKind::Binary => "binary",
            PipelineKind::General => "general",
            PipelineKind::Uniform => "uniform",
            PipelineKind::Coloring => "coloring",
        })
    }
}

impl FromStr for PipelineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(PipelineKind::Binary),
            "general" => Ok(PipelineKind::General),
            "uniform" => Ok(PipelineKind::Uniform),
            "coloring" => Ok(PipelineKind::Coloring),
            _ => Err(Error::Contract(format!("unknown pipeline '{s}'"))),
        }
    }
}

pub const DEFAULT_ZETA: f64 = 0.01;

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub zeta: f64,
    /// Skip regime checks. A marking that fails the sampler's exactness
    /// requirement is repaired by unmarking variables.
    pub force: bool,
    /// Seed of the marking construction.
    pub seed: u64,
    pub config: SamplerConfig,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { zeta: DEFAULT_ZETA, force: false, seed: 0, config: SamplerConfig::default() }
    }
}

/// How the marking was obtained.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConstructionInfo {
    pub attempts: u32,
    pub resamplings: u64,
    /// The constructor's own verification succeeded.
    pub valid: bool,
    /// The marking was altered by the forced fallback.
    pub repaired: bool,
}

/// A ready-to-sample instance.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub kind: PipelineKind,
    /// The input after substituting single-value variables.
    pub original: AtomicCsp,
    /// Present when the chain runs on a tensorized instance.
    pub tensor: Option<TensorizedCsp>,
    pub marking: Marking,
    pub report: ConditionReport,
    pub regime: RegimeCheck,
    pub construction: ConstructionInfo,
    pub config: SamplerConfig,
}

impl Prepared {
    /// The instance the chain runs on.
    pub fn target(&self) -> &AtomicCsp {
        self.tensor.as_ref().map_or(&self.original, |t| &t.csp)
    }

    pub fn sampler(&self) -> Result<Sampler<'_>> {
        Sampler::new(self.target(), &self.marking, self.config.clone())
    }

    /// One exact sample of the original instance.
    pub fn draw(&self, sampler: &Sampler, seed: u64) -> Result<Vec<u32>> {
        let rec = sampler.sample(seed)?;
        Ok(match &self.tensor {
            Some(t) => t.trans(&rec.assignment),
            None => rec.assignment,
        })
    }

    /// Sample `i` uses seed `derive_seed(seed, i)`, so the output does not
    /// depend on `jobs`.
    pub fn draw_many(&self, num: u64, seed: u64, jobs: usize) -> Result<Vec<Vec<u32>>> {
        let sampler = self.sampler()?;
        map_indexed(num as usize, jobs, |i| self.draw(&sampler, derive_seed(seed, i as u64))).into_iter().collect()
    }
}

fn strict_opts(force: bool) -> ConstructOptions {
    ConstructOptions { strict: !force, ..ConstructOptions::default() }
}

fn regime_gate(regime: &RegimeCheck, csp: &AtomicCsp, force: bool) -> Result<()> {
    if !force && !regime.ok {
        return Err(Error::Regime(regime.describe(&csp.measures())));
    }
    Ok(())
}

/// Checks the final marking; under `force` a failing one is repaired.
fn finish(
    kind: PipelineKind,
    original: AtomicCsp,
    tensor: Option<TensorizedCsp>,
    marking: Marking,
    regime: RegimeCheck,
    mut construction: ConstructionInfo,
    opts: &PipelineOptions,
) -> Result<Prepared> {
    let target = tensor.as_ref().map_or(&original, |t| &t.csp);
    let mut report = check_theorem_conditions(target, &marking);
    let mut marking = marking;
    if !report.pass {
        if !opts.force {
            return Err(Error::Regime(format!(
                "marking fails the sampling conditions (slacks: alpha {:.4}, rho {:.4}, lambda {:.4})",
                report.slack_alpha, report.slack_rho, report.slack_lambda
            )));
        }
        let repaired = repair_marking(target, &marking);
        construction.repaired = repaired != marking;
        marking = repaired;
        report = check_theorem_conditions(target, &marking);
    }
    Ok(Prepared { kind, original, tensor, marking, report, regime, construction, config: opts.config.clone() })
}

pub fn pipeline_binary(csp: &AtomicCsp, opts: &PipelineOptions) -> Result<Prepared> {
    let csp = preprocess(csp)?;
    let out = construct_marking_binary_with(&csp, opts.zeta, opts.seed, &strict_opts(opts.force))?;
    let info = ConstructionInfo { attempts: out.attempts, resamplings: out.resamplings, valid: out.valid, repaired: false };
    finish(PipelineKind::Binary, csp, None, out.marking, out.regime, info, opts)
}

/// Huffman trees per variable, then the binary construction on the
/// tensorized instance. The regime uses `max(κ, 2)`.
pub fn pipeline_general(csp: &AtomicCsp, opts: &PipelineOptions) -> Result<Prepared> {
    let csp = preprocess(csp)?;
    let meas = csp.measures();
    let mut tilde = meas.clone();
    tilde.kappa = meas.kappa.max(2.0);
    let regime = binary_regime(&tilde, &binary_params(tilde.kappa, opts.zeta));
    regime_gate(&regime, &csp, opts.force)?;
    let trees = csp.vars().iter().map(|v| huffman_tensorize(v.weights())).collect::<Result<Vec<_>>>()?;
    let tensor = tensorize(&csp, trees)?;
    let out = construct_marking_binary_with(&tensor.csp, opts.zeta, opts.seed, &strict_opts(opts.force))?;
    let info = ConstructionInfo { attempts: out.attempts, resamplings: out.resamplings, valid: out.valid, repaired: false };
    finish(PipelineKind::General, csp, Some(tensor), out.marking, regime, info, opts)
}

/// Uniform domains. An all-binary instance uses the binary construction
/// directly; otherwise randomized trees and marks are drawn jointly.
pub fn pipeline_uniform(csp: &AtomicCsp, opts: &PipelineOptions) -> Result<Prepared> {
    let csp = preprocess(csp)?;
    let copts = strict_opts(opts.force);
    if csp.vars().iter().all(|v| v.domain_size() == 2) {
        let out = construct_marking_uniform_binary_with(&csp, opts.seed, &copts)?;
        let info =
            ConstructionInfo { attempts: out.attempts, resamplings: out.resamplings, valid: out.valid, repaired: false };
        return finish(PipelineKind::Uniform, csp, None, out.marking, out.regime, info, opts);
    }
    let out = construct_uniform(&csp, opts.seed, &copts)?;
    let info = ConstructionInfo { attempts: out.attempts, resamplings: out.resamplings, valid: out.valid, repaired: false };
    debug_assert_eq!(uniform_regime(&csp.measures()), out.regime);
    finish(PipelineKind::Uniform, csp, Some(out.tensorized), out.marking, out.regime, info, opts)
}

/// Proper `q`-colorings of a k-uniform hypergraph via the balanced tree
/// with its deterministic marking.
pub fn pipeline_coloring(h: &HypergraphInstance, q: usize, opts: &PipelineOptions) -> Result<Prepared> {
    let csp = build_coloring(h, q)?;
    let regime = coloring_regime(q, h.k(), h.max_dependency());
    regime_gate(&regime, &csp, opts.force)?;
    let template = complete_binary_tensorize_with_marking(q, h.k())?;
    let tensor = tensorize(&csp, vec![template.tree.clone(); csp.num_vars()])?;
    let marking = tensor.marking_from_node_marks(&vec![template.marks.clone(); csp.num_vars()]);
    let info = ConstructionInfo { attempts: 1, resamplings: 0, valid: true, repaired: false };
    finish(PipelineKind::Coloring, csp, Some(tensor), marking, regime, info, opts)
}

/// Runs the pipeline for `kind` on a CSP. The coloring pipeline needs a
/// hypergraph and is reached through [`pipeline_coloring`].
pub fn prepare(kind: PipelineKind, csp: &AtomicCsp, opts: &PipelineOptions) -> Result<Prepared> {
    match kind {
        PipelineKind::Binary => pipeline_binary(csp, opts),
        PipelineKind::General => pipeline_general(csp, opts),
        PipelineKind::Uniform => pipeline_uniform(csp, opts),
        PipelineKind::Coloring => {
            Err(Error::Contract("the coloring pipeline needs a hypergraph input".into()))
        }
    }
}
