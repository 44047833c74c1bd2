use crate::csp::AtomicCsp;
use crate::error::Result;
use crate::kernels::tape::derive_seed;
use crate::marking::Marking;
use crate::par::map_indexed;
use crate::sampler::{Sampler, SamplerConfig};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CoalescenceRow {
    pub horizon: u64,
    pub trials: u64,
    pub failures: u64,
    pub fraction: f64,
    pub bound: f64,
    /// Three binomial standard deviations at the bound.
    pub slack: f64,
    /// The bound only applies from `T ≥ 2n − 1`.
    pub asserted: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoalescenceTable {
    pub n: usize,
    pub rows: Vec<CoalescenceRow>,
    pub pass: bool,
}

/// `min(1, 4n·2^{−T/n})`.
pub fn coalescence_bound(n: usize, horizon: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    (4.0 * nf * (-(horizon as f64) / nf).exp2()).min(1.0)
}

/// Fraction of bounding-chain runs that leave a marked `⋆` after `T` steps,
/// per horizon. Trial `j` uses seed `derive_seed(seed, j)` at every horizon.
pub fn coalescence_experiment(
    csp: &AtomicCsp,
    m: &Marking,
    horizons: &[u64],
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<CoalescenceTable> {
    let sampler = Sampler::new(csp, m, SamplerConfig::default())?;
    let n = csp.num_vars();
    let mut rows = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        let outcomes = map_indexed(trials as usize, jobs, |j| {
            sampler.bounding_chain(horizon, derive_seed(seed, j as u64)).map(|r| !r.coalesced)
        });
        let mut failures = 0u64;
        for o in outcomes {
            failures += u64::from(o?);
        }
        let fraction = failures as f64 / trials as f64;
        let bound = coalescence_bound(n, horizon);
        let slack = 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
        let asserted = horizon + 1 >= 2 * n as u64;
        let pass = !asserted || fraction <= bound + slack;
        rows.push(CoalescenceRow { horizon, trials, failures, fraction, bound, slack, asserted, pass });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(CoalescenceTable { n, rows, pass })
}
