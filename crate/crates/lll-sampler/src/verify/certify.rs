use super::law::ExactLaw;
use super::stats::{chi_square, tv_distance, CHI_SQUARE_ALPHA};
use crate::csp::AtomicCsp;
use crate::error::Result;
use crate::kernels::tape::derive_seed;
use crate::marking::Marking;
use crate::par::map_indexed;
use crate::sampler::{Sampler, SamplerConfig};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CertifyReport {
    pub samples: u64,
    pub support: usize,
    pub tv: f64,
    /// Twice the expected sampling noise `0.5·√(S/N)`.
    pub tv_threshold: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    pub max_abs_z: f64,
    pub max_marginal_gap: f64,
    /// Draws that are not satisfying assignments.
    pub outside_support: u64,
    pub pass: bool,
}

pub fn tv_threshold(support: usize, samples: u64) -> f64 {
    2.0 * 0.5 * (support as f64 / samples as f64).sqrt()
}

/// Compares `num_samples` draws against `law`. Draw `i` is produced by
/// `draw(i)`; draws are evaluated on up to `jobs` workers.
pub fn certify<F>(law: &ExactLaw, num_samples: u64, jobs: usize, draw: F) -> Result<CertifyReport>
where
    F: Fn(u64) -> Result<Vec<u32>> + Sync + Send,
{
    const CHUNK: u64 = 4096;
    let mut counts = vec![0u64; law.len()];
    let mut outside = 0u64;
    let chunks = num_samples.div_ceil(CHUNK);
    let partial = map_indexed(chunks as usize, jobs, |c| -> Result<(Vec<u64>, u64)> {
        let mut local = vec![0u64; law.len()];
        let mut out = 0u64;
        let lo = c as u64 * CHUNK;
        for i in lo..(lo + CHUNK).min(num_samples) {
            let s = draw(i)?;
            match law.index_of(&s) {
                Some(j) => local[j] += 1,
                None => out += 1,
            }
        }
        Ok((local, out))
    });
    for r in partial {
        let (local, out) = r?;
        counts.iter_mut().zip(&local).for_each(|(a, b)| *a += b);
        outside += out;
    }
    let nf = num_samples as f64;
    let emp: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
    let tv = tv_distance(&emp, &law.pmf) + 0.5 * outside as f64 / nf;
    let chi = chi_square(&counts, &law.pmf);
    let max_abs_z = counts
        .iter()
        .zip(&law.pmf)
        .map(|(&c, &p)| {
            let sd = (nf * p * (1.0 - p)).sqrt();
            if sd > 0.0 { (c as f64 - nf * p).abs() / sd } else { 0.0 }
        })
        .fold(0.0, f64::max);
    let n_vars = law.support.first().map_or(0, |s| s.len());
    let mut max_marginal_gap: f64 = 0.0;
    for v in 0..n_vars {
        let dom = law.support.iter().map(|s| s[v] as usize + 1).max().unwrap_or(1);
        let mut exact = vec![0.0; dom];
        let mut seen = vec![0.0; dom];
        for ((s, &p), &c) in law.support.iter().zip(&law.pmf).zip(&counts) {
            exact[s[v] as usize] += p;
            seen[s[v] as usize] += c as f64 / nf;
        }
        for (a, b) in exact.iter().zip(&seen) {
            max_marginal_gap = max_marginal_gap.max((a - b).abs());
        }
    }
    let tv_threshold = tv_threshold(law.len(), num_samples);
    let p_value = if outside > 0 { 0.0 } else { chi.p_value };
    let pass = outside == 0 && tv <= tv_threshold && p_value >= CHI_SQUARE_ALPHA;
    Ok(CertifyReport {
        samples: num_samples,
        support: law.len(),
        tv,
        tv_threshold,
        chi_square: chi.statistic,
        dof: chi.dof,
        p_value,
        max_abs_z,
        max_marginal_gap,
        outside_support: outside,
        pass,
    })
}

/// Certifies the sampler on `csp` with marking `m`; draw `i` uses seed
/// `derive_seed(seed, i)`.
pub fn certify_sampler(
    csp: &AtomicCsp,
    m: &Marking,
    law: &ExactLaw,
    num_samples: u64,
    seed: u64,
    jobs: usize,
) -> Result<CertifyReport> {
    let sampler = Sampler::new(csp, m, SamplerConfig::default())?;
    certify(law, num_samples, jobs, |i| Ok(sampler.sample(derive_seed(seed, i))?.assignment))
}
