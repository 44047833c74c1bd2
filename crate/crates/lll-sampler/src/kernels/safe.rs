use crate::csp::AtomicCsp;
use crate::error::{Error, Result};
use crate::marking::{compute_constants, Marking};

/// The safe distribution `D★` over `Ω_u ∪ {⋆}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SafePmf {
    /// `D★(q)` for each domain value.
    pub values: Vec<f64>,
    /// `D★(⋆)`.
    pub star: f64,
}

impl SafePmf {
    pub fn from_beta(weights: &[f64], beta: f64) -> Self {
        let values: Vec<f64> = weights.iter().map(|&w| (1.0 - beta * (1.0 - w)).max(0.0)).collect();
        let star = (1.0 - values.iter().sum::<f64>()).max(0.0);
        Self { values, star }
    }
}

pub fn safe_pmf(csp: &AtomicCsp, m: &Marking, u: usize) -> Result<SafePmf> {
    if !m.is_marked(u) {
        return Err(Error::Contract(format!("safe_pmf: variable {u} is not marked")));
    }
    let consts = compute_constants(csp, m)?;
    Ok(SafePmf::from_beta(csp.var(u).weights(), consts.log_beta.exp()))
}
