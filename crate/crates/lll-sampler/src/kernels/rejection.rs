use super::tape::TapeStream;
use crate::csp::{AtomicCsp, ProjectedConstraint};
use crate::error::{Error, Result};

pub const DEFAULT_REJECTION_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct RejectionOutcome {
    /// Values aligned with the `vars` argument.
    pub values: Vec<u32>,
    pub attempts: u64,
}

/// Draw `vars` from their product law until none of `constraints` is
/// falsified. `vars` must be sorted and contain every variable of every
/// constraint.
pub fn rejection_sampling(
    csp: &AtomicCsp,
    vars: &[usize],
    constraints: &[ProjectedConstraint],
    stream: &mut TapeStream,
    cap: u64,
) -> Result<RejectionOutcome> {
    let local: Vec<Vec<(usize, u32)>> = constraints
        .iter()
        .map(|c| {
            c.vbl
                .iter()
                .zip(&c.falsifying)
                .map(|(&v, &f)| {
                    vars.binary_search(&v).map(|i| (i, f)).map_err(|_| {
                        Error::Contract(format!("rejection sampling: variable {v} outside the block"))
                    })
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0u32; vars.len()];
    for attempt in 1..=cap {
        for (slot, &v) in values.iter_mut().zip(vars) {
            *slot = stream.pick(csp.var(v).weights()) as u32;
        }
        if !local.iter().any(|c| c.iter().all(|&(i, f)| values[i] == f)) {
            return Ok(RejectionOutcome { values, attempts: attempt });
        }
    }
    Err(Error::Budget(format!("rejection sampling stalled after {cap} attempts")))
}
