#![allow(dead_code)]

use lll_sampler::{AtomicConstraint, AtomicCsp, VariableSpec};
use std::collections::HashMap;

/// Cyclic blocks: `blocks` groups of `width` variables, constraint `i`
/// covering groups `i` and `i + 1`. Every variable falsifies at value 1.
pub fn block_cycle(blocks: usize, width: usize, weights: impl Fn(usize) -> Vec<f64>) -> AtomicCsp {
    let n = blocks * width;
    let vars = (0..n).map(|v| VariableSpec::new(weights(v)).unwrap()).collect();
    let cons = (0..blocks)
        .map(|i| {
            let j = (i + 1) % blocks;
            let mut vbl: Vec<usize> = (i * width..(i + 1) * width).chain(j * width..(j + 1) * width).collect();
            vbl.sort_unstable();
            let k = vbl.len();
            AtomicConstraint::new(vbl, vec![1; k])
        })
        .collect();
    AtomicCsp::new(vars, cons).unwrap()
}

/// Weighted binary blocks with falsifying weight 0.05.
pub fn weighted_blocks(n: usize) -> AtomicCsp {
    block_cycle(n / 2, 2, |_| vec![0.95, 0.05])
}

/// As [`weighted_blocks`] with falsifying weights spread over [0.02, 0.05].
pub fn weighted_blocks_spread(n: usize) -> AtomicCsp {
    block_cycle(n / 2, 2, |v| {
        let f = 0.02 + 0.03 * ((v * 7 + 3) % 11) as f64 / 10.0;
        vec![1.0 - f, f]
    })
}

/// Uniform binary, clause width 150, 600 variables, Δ = 3.
pub fn wide_instance() -> AtomicCsp {
    block_cycle(8, 75, |_| vec![0.5, 0.5])
}

/// u over {a, b, c} uniform; v over {A, B, C, D} with weights
/// 1/4, 1/4, 1/3, 1/6; forbid u = a and (u = c, v = B).
pub fn mixed_two_var() -> AtomicCsp {
    AtomicCsp::new(
        vec![VariableSpec::uniform(3), VariableSpec::new(vec![0.25, 0.25, 1.0 / 3.0, 1.0 / 6.0]).unwrap()],
        vec![AtomicConstraint::new(vec![0], vec![0]), AtomicConstraint::new(vec![0, 1], vec![2, 1])],
    )
    .unwrap()
}

/// Six binary variables, three clauses of width three.
pub fn cnf6() -> AtomicCsp {
    AtomicCsp::new(
        vec![VariableSpec::uniform(2); 6],
        vec![
            AtomicConstraint::new(vec![0, 1, 2], vec![0, 1, 0]),
            AtomicConstraint::new(vec![2, 3, 4], vec![1, 0, 0]),
            AtomicConstraint::new(vec![1, 4, 5], vec![0, 1, 0]),
        ],
    )
    .unwrap()
}

/// Every full assignment in mixed-radix order (last variable fastest).
pub fn all_assignments(domains: &[usize]) -> Vec<Vec<u32>> {
    let total: usize = domains.iter().product();
    (0..total)
        .map(|mut idx| {
            let mut a = vec![0u32; domains.len()];
            for v in (0..domains.len()).rev() {
                a[v] = (idx % domains[v]) as u32;
                idx /= domains[v];
            }
            a
        })
        .collect()
}

/// Brute-force target law: product weight on satisfying assignments.
pub fn brute_law(csp: &AtomicCsp) -> HashMap<Vec<u32>, f64> {
    let domains: Vec<usize> = csp.vars().iter().map(|v| v.domain_size()).collect();
    let mut out = HashMap::new();
    let mut z = 0.0;
    for a in all_assignments(&domains) {
        let sat = csp.constraints().iter().all(|c| !c.vbl.iter().zip(&c.falsifying).all(|(&v, &f)| a[v] == f));
        if sat {
            let w: f64 = a.iter().enumerate().map(|(v, &q)| csp.var(v).weight(q)).product();
            z += w;
            out.insert(a, w);
        }
    }
    out.values_mut().for_each(|w| *w /= z);
    out
}

pub fn tv(p: &HashMap<Vec<u32>, f64>, q: &HashMap<Vec<u32>, f64>) -> f64 {
    let mut keys: Vec<&Vec<u32>> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys.iter().map(|k| (p.get(*k).unwrap_or(&0.0) - q.get(*k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

pub fn empirical(samples: &[Vec<u32>]) -> HashMap<Vec<u32>, f64> {
    let mut out = HashMap::new();
    for s in samples {
        *out.entry(s.clone()).or_insert(0.0) += 1.0;
    }
    let n = samples.len() as f64;
    out.values_mut().for_each(|c| *c /= n);
    out
}

/// A marking from the binary constructor that passes the sampling
/// conditions, searching construction seeds from 0.
pub fn valid_marking(csp: &AtomicCsp) -> lll_sampler::Marking {
    use lll_sampler::marking::{construct_marking_binary_with, ConstructOptions};
    let opts = ConstructOptions { strict: false, ..ConstructOptions::default() };
    for seed in 0..64 {
        let out = construct_marking_binary_with(csp, 0.01, seed, &opts).unwrap();
        if out.report.pass && out.marking.count() > 0 {
            return out.marking;
        }
    }
    panic!("no valid marking found");
}

/// Law of variable `u` given the non-`⋆` entries of `sigma`, by brute force.
pub fn conditional_marginal(csp: &AtomicCsp, sigma: &lll_sampler::PartialAssignment, u: usize) -> Vec<f64> {
    let domains: Vec<usize> = csp.vars().iter().map(|v| v.domain_size()).collect();
    let mut out = vec![0.0; domains[u]];
    for a in all_assignments(&domains) {
        if (0..a.len()).any(|v| !sigma.is_star(v) && sigma.raw(v) != a[v]) {
            continue;
        }
        if !csp.is_satisfying(&a) {
            continue;
        }
        let w: f64 = a.iter().enumerate().filter(|&(v, _)| sigma.is_star(v)).map(|(v, &q)| csp.var(v).weight(q)).product();
        out[a[u] as usize] += w;
    }
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= z);
    out
}
