use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;
use std::hash::Hash;

/// Cells with a smaller expected count are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

/// Significance level of the goodness-of-fit test.
pub const CHI_SQUARE_ALPHA: f64 = 1e-3;

/// Half the L1 distance between two pmfs over the same index set.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let at = |x: &[f64], i: usize| x.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
}

/// As [`tv_distance`], over keyed laws; keys missing on one side count as 0.
pub fn tv_distance_keyed<K: Eq + Hash>(p: &HashMap<K, f64>, q: &HashMap<K, f64>) -> f64 {
    let mut s: f64 = p.iter().map(|(k, &a)| (a - q.get(k).copied().unwrap_or(0.0)).abs()).sum();
    s += q.iter().filter(|(k, _)| !p.contains_key(*k)).map(|(_, &b)| b.abs()).sum::<f64>();
    0.5 * s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of cells after pooling.
    pub cells: usize,
}

/// Pearson's test of `counts` against `probs`, pooling every cell whose
/// expected count is below [`MIN_EXPECTED`] into one. If that pool is
/// itself too small it is merged into the smallest remaining cell.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(counts.len(), probs.len());
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let e = p * nf;
        if e < MIN_EXPECTED {
            pool.0 += c as f64;
            pool.1 += e;
        } else {
            cells.push((c as f64, e));
        }
    }
    if pool.1 > 0.0 || pool.0 > 0.0 {
        if pool.1 >= MIN_EXPECTED || cells.is_empty() {
            cells.push(pool);
        } else {
            let j = (0..cells.len()).min_by(|&a, &b| cells[a].1.total_cmp(&cells[b].1)).expect("non-empty");
            cells[j].0 += pool.0;
            cells[j].1 += pool.1;
        }
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e) * (o - e) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else if statistic.is_infinite() {
        0.0
    } else {
        ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
    };
    ChiSquare { statistic, dof, p_value, cells: cells.len() }
}
