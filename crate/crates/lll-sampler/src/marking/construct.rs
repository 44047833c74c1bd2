use super::mt::{moser_tardos_outcome, MT_CAP_FACTOR};
use super::{check_theorem_conditions, log_alpha, ConditionReport, Marking};
use crate::csp::{AtomicCsp, Measures};
use crate::error::{Error, Result};
use crate::kernels::tape::{Label, Tape, TapeStream};
use serde::Serialize;
use std::f64::consts::LN_2;

/// Closed-form parameters of the binary-domain marking construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinaryParams {
    pub kappa: f64,
    pub zeta: f64,
    /// ln(κ + 1).
    pub l: f64,
    pub tau: f64,
    pub eta: f64,
    pub gamma: f64,
}

pub fn binary_params(kappa: f64, zeta: f64) -> BinaryParams {
    let l = (kappa + 1.0).ln();
    let s = (l * l + 6.0 * (1.0 - 3.0 * zeta) * l).sqrt();
    let tau = (s - l) / 6.0;
    let eta = (2.0 - tau + 3.0 * zeta) / 3.0;
    let gamma = (3.0 - 9.0 * zeta + l - s) / 9.0;
    BinaryParams { kappa, zeta, l, tau, eta, gamma }
}

/// Fixed constants of the uniform-domain construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UniformConstants {
    pub eta: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub zeta: f64,
    pub gamma: f64,
}

pub const UNIFORM: UniformConstants =
    UniformConstants { eta: 0.595, tau1: 0.23, tau2: 0.245 - 3e-5, zeta: 1e-5, gamma: 0.175 };

/// A regime inequality `lhs ≤ rhs` evaluated in natural-log space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub inequality: String,
    pub gamma: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
    pub ok: bool,
}

impl RegimeCheck {
    pub fn describe(&self, m: &Measures) -> String {
        format!(
            "{} fails: ln lhs = {:.4} > ln rhs = {:.4} (gamma = {:.6}, ln p = {:.4}, Delta = {}, kappa = {})",
            self.inequality, self.log_lhs, self.log_rhs, self.gamma, m.log_p, m.delta, m.kappa
        )
    }
}

/// `p^γ·Δ ≤ 0.01·ζ/κ` with `γ, ζ, κ` taken from `params`.
pub fn binary_regime(m: &Measures, params: &BinaryParams) -> RegimeCheck {
    let log_lhs = params.gamma * m.log_p + (m.delta as f64).ln();
    let log_rhs = (0.01 * params.zeta / params.kappa).ln();
    RegimeCheck {
        inequality: "p^gamma * Delta <= 0.01 * zeta / kappa".into(),
        gamma: params.gamma,
        log_lhs,
        log_rhs,
        ok: log_lhs <= log_rhs,
    }
}

/// `p^0.175·Δ ≤ 10^-7`.
pub fn uniform_regime(m: &Measures) -> RegimeCheck {
    let log_lhs = UNIFORM.gamma * m.log_p + (m.delta as f64).ln();
    let log_rhs = 1e-7f64.ln();
    RegimeCheck {
        inequality: "p^0.175 * Delta <= 1e-7".into(),
        gamma: UNIFORM.gamma,
        log_lhs,
        log_rhs,
        ok: log_lhs <= log_rhs,
    }
}

/// Deviation event of constraint `c` for the binary construction.
pub fn binary_event(csp: &AtomicCsp, marked: &[bool], c: usize, params: &BinaryParams) -> bool {
    let con = csp.constraint(c);
    let s: f64 = con.iter().filter(|&(v, _)| marked[v]).map(|(v, f)| csp.weight(v, f).ln()).sum();
    let lp = csp.log_falsify_prob(c);
    (s - params.eta * lp).abs() > params.tau * (-lp)
}

/// The two one-sided events of the uniform construction. `sum_x` is the sum
/// of base-2 marked log-weights along the falsifying paths and `bits` is
/// log2(1/p_C).
pub fn uniform_events(sum_x: f64, bits: f64) -> (bool, bool) {
    let lower = -sum_x > (UNIFORM.eta + UNIFORM.tau1) * bits;
    let upper = sum_x > -(UNIFORM.eta - UNIFORM.tau2) * bits;
    (lower, upper)
}

#[derive(Clone, Debug)]
pub struct ConstructOptions {
    pub retry_cap: u32,
    /// When false, the regime check is skipped and failures return the last
    /// attempt instead of an error.
    pub strict: bool,
    pub mt_cap_factor: u64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self { retry_cap: 64, strict: true, mt_cap_factor: MT_CAP_FACTOR }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkingOutcome {
    pub marking: Marking,
    pub report: ConditionReport,
    pub regime: RegimeCheck,
    pub attempts: u32,
    pub resamplings: u64,
    /// Conditions hold and no deviation event occurs.
    pub valid: bool,
}

fn require_binary(csp: &AtomicCsp, uniform: bool) -> Result<()> {
    for (v, spec) in csp.vars().iter().enumerate() {
        if spec.domain_size() != 2 {
            return Err(Error::Regime(format!(
                "variable {v} has domain size {}; this construction needs binary domains",
                spec.domain_size()
            )));
        }
        if uniform && !spec.is_uniform() {
            return Err(Error::Regime(format!("variable {v} is not uniformly distributed")));
        }
    }
    Ok(())
}

/// Retry loop shared by both binary constructors: draw i.i.d. marks, run
/// Moser–Tardos against `event`, and re-verify.
fn construct<E>(
    csp: &AtomicCsp,
    seed: u64,
    eta: f64,
    event: E,
    regime: RegimeCheck,
    opts: &ConstructOptions,
) -> Result<MarkingOutcome>
where
    E: Fn(usize, &[bool]) -> bool,
{
    let tape = Tape::new(seed);
    let n = csp.num_vars();
    let event_vars: Vec<Vec<usize>> = csp.constraints().iter().map(|c| c.vbl.clone()).collect();
    let cap = opts.mt_cap_factor.saturating_mul(event_vars.len() as u64);
    let mut resamplings = 0;
    let mut last = None;
    for attempt in 0..opts.retry_cap.max(1) {
        let mut streams: Vec<Option<TapeStream>> = vec![None; n];
        let out = moser_tardos_outcome(
            n,
            &event_vars,
            |v| {
                streams[v]
                    .get_or_insert_with(|| tape.stream(v as i64, Label::Marking, attempt as u64))
                    .bernoulli(eta)
            },
            &event,
            cap,
        );
        resamplings += out.stats.resamplings;
        let events_clear = out.converged && (0..event_vars.len()).all(|c| !event(c, &out.state));
        let marking = Marking::from_bools(out.state);
        let report = check_theorem_conditions(csp, &marking);
        let valid = events_clear && report.pass;
        let outcome = MarkingOutcome {
            marking,
            report,
            regime: regime.clone(),
            attempts: attempt + 1,
            resamplings,
            valid,
        };
        if valid {
            return Ok(outcome);
        }
        last = Some(outcome);
    }
    if opts.strict {
        Err(Error::Budget(format!("marking construction failed after {} attempts", opts.retry_cap)))
    } else {
        Ok(last.expect("at least one attempt"))
    }
}

pub fn construct_marking_binary(csp: &AtomicCsp, zeta: f64, seed: u64) -> Result<MarkingOutcome> {
    construct_marking_binary_with(csp, zeta, seed, &ConstructOptions::default())
}

pub fn construct_marking_binary_with(
    csp: &AtomicCsp,
    zeta: f64,
    seed: u64,
    opts: &ConstructOptions,
) -> Result<MarkingOutcome> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::Contract(format!("zeta = {zeta} must lie in (0, 1)")));
    }
    require_binary(csp, false)?;
    let meas = csp.measures();
    let params = binary_params(meas.kappa, zeta);
    let regime = binary_regime(&meas, &params);
    if opts.strict && !regime.ok {
        return Err(Error::Regime(regime.describe(&meas)));
    }
    construct(csp, seed, params.eta, |c, s| binary_event(csp, s, c, &params), regime, opts)
}

pub fn construct_marking_uniform_binary(csp: &AtomicCsp, seed: u64) -> Result<MarkingOutcome> {
    construct_marking_uniform_binary_with(csp, seed, &ConstructOptions::default())
}

pub fn construct_marking_uniform_binary_with(
    csp: &AtomicCsp,
    seed: u64,
    opts: &ConstructOptions,
) -> Result<MarkingOutcome> {
    require_binary(csp, true)?;
    let meas = csp.measures();
    let regime = uniform_regime(&meas);
    if opts.strict && !regime.ok {
        return Err(Error::Regime(regime.describe(&meas)));
    }
    let event = |c: usize, s: &[bool]| {
        let con = csp.constraint(c);
        let marked = con.vbl.iter().filter(|&&v| s[v]).count() as f64;
        let (lower, upper) = uniform_events(-marked, -csp.log_falsify_prob(c) / LN_2);
        lower || upper
    };
    construct(csp, seed, UNIFORM.eta, event, regime, opts)
}

/// Unmark variables until `e·α(C)·Δ ≤ 1` holds for every constraint, which
/// is what keeps the coupled update exact. Falls back to the empty marking
/// when some constraint cannot be repaired.
pub fn repair_marking(csp: &AtomicCsp, m: &Marking) -> Marking {
    let ln_delta = (csp.measures().delta as f64).ln();
    let (_, per) = log_alpha(csp, m);
    let mut out = m.clone();
    for (ci, c) in csp.constraints().iter().enumerate() {
        // Unmarking only lowers α of other constraints, so one pass suffices.
        let mut la = per[ci];
        la += c
            .iter()
            .filter(|&(v, _)| !out.is_marked(v) && m.is_marked(v))
            .map(|(v, f)| csp.weight(v, f).ln())
            .sum::<f64>();
        let mut candidates: Vec<(f64, usize)> =
            c.iter().filter(|&(v, _)| out.is_marked(v)).map(|(v, f)| (csp.weight(v, f), v)).collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut next = candidates.into_iter();
        while 1.0 + la + ln_delta > 0.0 {
            match next.next() {
                Some((w, v)) => {
                    out.set(v, false);
                    la += w.ln();
                }
                None => return Marking::none(csp.num_vars()),
            }
        }
    }
    out
}
