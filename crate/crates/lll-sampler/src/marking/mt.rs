use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeSet;

/// Default resampling cap is this factor times the number of events.
pub const MT_CAP_FACTOR: u64 = 10_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MtStats {
    pub resamplings: u64,
    pub initially_violated: usize,
}

#[derive(Clone, Debug)]
pub struct MtOutcome<S> {
    pub state: Vec<S>,
    pub stats: MtStats,
    pub converged: bool,
}

/// Moser–Tardos resampling that always returns the final state, flagging
/// whether every event was avoided before the cap.
///
/// Variables are drawn with `sample_var(v)`; event `e` depends on
/// `event_vars[e]` and occurs iff `occurs(e, state)`. The lowest-index
/// occurring event is resampled first.
pub fn moser_tardos_outcome<S, F, P>(
    num_vars: usize,
    event_vars: &[Vec<usize>],
    mut sample_var: F,
    occurs: P,
    cap: u64,
) -> MtOutcome<S>
where
    F: FnMut(usize) -> S,
    P: Fn(usize, &[S]) -> bool,
{
    let mut state: Vec<S> = (0..num_vars).map(&mut sample_var).collect();
    let mut var_events = vec![Vec::new(); num_vars];
    for (e, vars) in event_vars.iter().enumerate() {
        for &v in vars {
            var_events[v].push(e);
        }
    }
    let mut violated: BTreeSet<usize> = (0..event_vars.len()).filter(|&e| occurs(e, &state)).collect();
    let mut stats = MtStats { resamplings: 0, initially_violated: violated.len() };
    while let Some(&e) = violated.iter().next() {
        if stats.resamplings >= cap {
            return MtOutcome { state, stats, converged: false };
        }
        stats.resamplings += 1;
        for &v in &event_vars[e] {
            state[v] = sample_var(v);
        }
        for &v in &event_vars[e] {
            for &e2 in &var_events[v] {
                if occurs(e2, &state) {
                    violated.insert(e2);
                } else {
                    violated.remove(&e2);
                }
            }
        }
    }
    MtOutcome { state, stats, converged: true }
}

/// As [`moser_tardos_outcome`], failing when the cap (default
/// `MT_CAP_FACTOR × #events`) is exhausted.
pub fn moser_tardos<S, F, P>(
    num_vars: usize,
    event_vars: &[Vec<usize>],
    sample_var: F,
    occurs: P,
    cap: Option<u64>,
) -> Result<(Vec<S>, MtStats)>
where
    F: FnMut(usize) -> S,
    P: Fn(usize, &[S]) -> bool,
{
    let cap = cap.unwrap_or(MT_CAP_FACTOR.saturating_mul(event_vars.len() as u64));
    let out = moser_tardos_outcome(num_vars, event_vars, sample_var, occurs, cap);
    if out.converged {
        Ok((out.state, out.stats))
    } else {
        Err(Error::Budget(format!("Moser–Tardos did not converge within {cap} resamplings")))
    }
}
