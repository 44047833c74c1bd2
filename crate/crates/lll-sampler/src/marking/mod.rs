//! Markings, the constants they induce, and their construction.

mod construct;
mod mt;

pub use construct::{
    binary_event, binary_params, binary_regime, construct_marking_binary, construct_marking_binary_with,
    construct_marking_uniform_binary, construct_marking_uniform_binary_with, repair_marking, uniform_events,
    uniform_regime, BinaryParams, ConstructOptions, MarkingOutcome, RegimeCheck, UniformConstants, UNIFORM,
};
pub use mt::{moser_tardos, moser_tardos_outcome, MtOutcome, MtStats, MT_CAP_FACTOR};

use crate::csp::AtomicCsp;
use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::LN_2;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Marking {
    marked: Vec<bool>,
}

impl Marking {
    pub fn none(n: usize) -> Self {
        Self { marked: vec![false; n] }
    }

    pub fn all(n: usize) -> Self {
        Self { marked: vec![true; n] }
    }

    pub fn from_bools(marked: Vec<bool>) -> Self {
        Self { marked }
    }

    pub fn from_vars(n: usize, vars: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::none(n);
        for v in vars {
            m.marked[v] = true;
        }
        m
    }

    pub fn len(&self) -> usize {
        self.marked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marked.is_empty()
    }

    pub fn is_marked(&self, v: usize) -> bool {
        self.marked[v]
    }

    pub fn set(&mut self, v: usize, marked: bool) {
        self.marked[v] = marked;
    }

    pub fn count(&self) -> usize {
        self.marked.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.marked
    }

    pub fn marked_vars(&self) -> Vec<usize> {
        (0..self.marked.len()).filter(|&v| self.marked[v]).collect()
    }
}

/// α, β, ρ, λ in natural-log space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkingConstants {
    pub log_alpha: f64,
    #[serde(skip)]
    pub log_alpha_per: Vec<f64>,
    pub log_beta: f64,
    pub log_rho: f64,
    #[serde(skip)]
    pub log_rho_per: Vec<f64>,
    pub log_lambda: f64,
    #[serde(skip)]
    pub log_lambda_per: Vec<f64>,
    pub d: usize,
    pub delta: usize,
}

fn max_or_neg_inf(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Per-constraint ln α(Φ, ℳ, C) and their maximum.
pub fn log_alpha(csp: &AtomicCsp, m: &Marking) -> (f64, Vec<f64>) {
    let per: Vec<f64> = csp
        .constraints()
        .iter()
        .map(|c| c.iter().filter(|&(v, _)| !m.is_marked(v)).map(|(v, f)| csp.weight(v, f).ln()).sum())
        .collect();
    (max_or_neg_inf(&per), per)
}

pub fn compute_constants(csp: &AtomicCsp, m: &Marking) -> Result<MarkingConstants> {
    let meas = csp.measures();
    let (la, log_alpha_per) = log_alpha(csp, m);
    let e_alpha = (1.0 + la).exp();
    if e_alpha >= 1.0 {
        return Err(Error::ConditionsInfeasible { log_alpha: la });
    }
    let log_beta = -(meas.d as f64) * (-e_alpha).ln_1p();
    let beta = log_beta.exp();
    let beta_m1 = log_beta.exp_m1();
    let mut log_rho_per = Vec::with_capacity(csp.num_constraints());
    let mut log_lambda_per = Vec::with_capacity(csp.num_constraints());
    for c in csp.constraints() {
        let mut rho = 0.0;
        let mut lam = 2.0 * (c.arity() as f64).ln();
        for (v, f) in c.iter().filter(|&(v, _)| m.is_marked(v)) {
            let w = csp.weight(v, f);
            rho += log_beta + w.ln();
            let extra = csp.var(v).domain_size() as f64 - 2.0;
            lam += (beta * w + beta_m1 * extra).ln();
        }
        log_rho_per.push(rho);
        log_lambda_per.push(lam);
    }
    Ok(MarkingConstants {
        log_alpha: la,
        log_alpha_per,
        log_beta,
        log_rho: max_or_neg_inf(&log_rho_per),
        log_rho_per,
        log_lambda: max_or_neg_inf(&log_lambda_per),
        log_lambda_per,
        d: meas.d,
        delta: meas.delta,
    })
}

/// The three sufficient conditions, compared in log space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub alpha_ok: bool,
    pub rho_ok: bool,
    pub lambda_ok: bool,
    /// ln(rhs) − ln(lhs) of `e·α·Δ ≤ 1`.
    pub slack_alpha: f64,
    /// ln(rhs) − ln(lhs) of `e·Δ²·ρ ≤ 1/32`; −∞ when β is undefined.
    pub slack_rho: f64,
    /// ln(rhs) − ln(lhs) of `Δ²·λ ≤ 1/16`; −∞ when β is undefined.
    pub slack_lambda: f64,
    pub pass: bool,
    pub log_alpha: f64,
    pub constants: Option<MarkingConstants>,
}

pub fn check_theorem_conditions(csp: &AtomicCsp, m: &Marking) -> ConditionReport {
    let ln_delta = (csp.measures().delta as f64).ln();
    let (la, _) = log_alpha(csp, m);
    let slack_alpha = -(1.0 + la + ln_delta);
    let alpha_ok = slack_alpha >= 0.0;
    match compute_constants(csp, m) {
        Ok(c) => {
            let slack_rho = -(32f64.ln()) - (1.0 + 2.0 * ln_delta + c.log_rho);
            let slack_lambda = -(16f64.ln()) - (2.0 * ln_delta + c.log_lambda);
            let rho_ok = slack_rho >= 0.0;
            let lambda_ok = slack_lambda >= 0.0;
            ConditionReport {
                alpha_ok,
                rho_ok,
                lambda_ok,
                slack_alpha,
                slack_rho,
                slack_lambda,
                pass: alpha_ok && rho_ok && lambda_ok,
                log_alpha: la,
                constants: Some(c),
            }
        }
        Err(_) => ConditionReport {
            alpha_ok,
            rho_ok: false,
            lambda_ok: false,
            slack_alpha,
            slack_rho: f64::NEG_INFINITY,
            slack_lambda: f64::NEG_INFINITY,
            pass: false,
            log_alpha: la,
            constants: None,
        },
    }
}

/// Base-2 Kullback–Leibler divergence between Bernoulli(a) and Bernoulli(b).
pub fn kl_divergence(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::Contract(format!("kl_divergence({a}, {b}): arguments must lie in [0, 1]")));
    }
    let term = |x: f64, y: f64| {
        if x == 0.0 {
            0.0
        } else if y == 0.0 {
            f64::INFINITY
        } else {
            x * (x / y).ln() / LN_2
        }
    };
    let kl = term(a, b) + term(1.0 - a, 1.0 - b);
    if kl.is_infinite() {
        return Err(Error::Contract(format!("kl_divergence({a}, {b}) is infinite")));
    }
    Ok(kl.max(0.0))
}
