use super::component::ComponentResult;
use crate::csp::{AtomicCsp, STAR};
use crate::error::{Error, Result};
use serde::Serialize;

pub const DEFAULT_TERM_BUDGET: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MarginalMethod {
    InclusionExclusion,
    Enumeration,
}

/// Law of the focal variable under the component's constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentMarginal {
    pub pmf: Vec<f64>,
    pub method: MarginalMethod,
    /// Elementary terms evaluated.
    pub terms: u64,
}

/// Predicted cost of each method: `(2^|C'|, prod |Ω_v|)`, saturating.
pub fn cost_estimates(csp: &AtomicCsp, comp: &ComponentResult) -> (u64, u64) {
    let m = comp.constraints.len();
    let ie = if m >= 64 { u64::MAX } else { 1u64 << m };
    let en = comp
        .vars
        .iter()
        .fold(1u64, |acc, &v| acc.saturating_mul(csp.var(v).domain_size() as u64));
    (ie, en)
}

pub fn exact_component_marginal(
    csp: &AtomicCsp,
    comp: &ComponentResult,
    focal: usize,
    budget: u64,
) -> Result<ComponentMarginal> {
    if !comp.token {
        return Err(Error::Contract("component marginal requested for a Token=False component".into()));
    }
    let focal_local = comp
        .vars
        .binary_search(&focal)
        .map_err(|_| Error::Contract(format!("focal variable {focal} is not in the component")))?;
    let (ie_cost, enum_cost) = cost_estimates(csp, comp);
    if ie_cost > budget && enum_cost > budget {
        return Err(Error::Budget(format!(
            "component too large: {} constraints over {} variables",
            comp.constraints.len(),
            comp.vars.len()
        )));
    }
    let local = |v: usize| comp.vars.binary_search(&v).expect("component constraint leaves the component");
    let cons: Vec<Vec<(usize, u32)>> = comp
        .constraints
        .iter()
        .map(|c| c.vbl.iter().zip(&c.falsifying).map(|(&v, &f)| (local(v), f)).collect())
        .collect();
    let weights: Vec<&[f64]> = comp.vars.iter().map(|&v| csp.var(v).weights()).collect();
    // `scale` bounds the summed magnitude of the signed terms, so a total
    // within round-off of zero is recognised as an empty component.
    let (acc, terms, method, scale) = if ie_cost <= enum_cost {
        let mut ie = InclusionExclusion {
            cons: &cons,
            weights: &weights,
            focal: focal_local,
            assign: vec![STAR; weights.len()],
            undo: Vec::new(),
            acc: vec![0.0; weights[focal_local].len()],
            terms: 0,
            scale: 0.0,
        };
        ie.rec(0, 1.0, 1.0);
        (ie.acc, ie.terms, MarginalMethod::InclusionExclusion, ie.scale)
    } else {
        let (acc, terms) = enumerate(&cons, &weights, focal_local);
        (acc, terms, MarginalMethod::Enumeration, 0.0)
    };
    let z: f64 = acc.iter().sum();
    if z.is_nan() || z <= 1e-12 * scale {
        return Err(Error::Unsatisfiable(format!("component around variable {focal} has no solution")));
    }
    let mut pmf = Vec::with_capacity(acc.len());
    for a in acc {
        let x = a / z;
        if x < -1e-9 {
            return Err(Error::Invariant(format!("negative component marginal {x}")));
        }
        pmf.push(x.max(0.0));
    }
    Ok(ComponentMarginal { pmf, method, terms })
}

struct InclusionExclusion<'a> {
    cons: &'a [Vec<(usize, u32)>],
    weights: &'a [&'a [f64]],
    focal: usize,
    assign: Vec<u32>,
    undo: Vec<usize>,
    acc: Vec<f64>,
    terms: u64,
    scale: f64,
}

impl InclusionExclusion<'_> {
    /// Sum over subsets of `cons[i..]` given the falsifying pattern chosen so
    /// far; `prob` omits the focal variable's weight.
    fn rec(&mut self, i: usize, sign: f64, prob: f64) {
        if i == self.cons.len() {
            self.terms += 1;
            let wf = self.weights[self.focal];
            match self.assign[self.focal] {
                STAR => {
                    self.scale += prob * wf.iter().sum::<f64>();
                    for (a, &w) in self.acc.iter_mut().zip(wf) {
                        *a += sign * prob * w;
                    }
                }
                q => {
                    self.scale += prob * wf[q as usize];
                    self.acc[q as usize] += sign * prob * wf[q as usize];
                }
            }
            return;
        }
        self.rec(i + 1, sign, prob);
        let mark = self.undo.len();
        let mut p = prob;
        let mut compatible = true;
        for &(x, f) in &self.cons[i] {
            let cur = self.assign[x];
            if cur == STAR {
                self.assign[x] = f;
                self.undo.push(x);
                if x != self.focal {
                    p *= self.weights[x][f as usize];
                }
            } else if cur != f {
                compatible = false;
                break;
            }
        }
        if compatible {
            self.rec(i + 1, -sign, p);
        }
        while self.undo.len() > mark {
            let x = self.undo.pop().unwrap();
            self.assign[x] = STAR;
        }
    }
}

fn enumerate(cons: &[Vec<(usize, u32)>], weights: &[&[f64]], focal: usize) -> (Vec<f64>, u64) {
    let n = weights.len();
    let mut acc = vec![0.0; weights[focal].len()];
    let mut a = vec![0u32; n];
    let mut terms = 0u64;
    loop {
        terms += 1;
        if !cons.iter().any(|c| c.iter().all(|&(x, f)| a[x] == f)) {
            let w: f64 = a.iter().enumerate().map(|(x, &q)| weights[x][q as usize]).product();
            acc[a[focal] as usize] += w;
        }
        let mut i = 0;
        loop {
            if i == n {
                return (acc, terms);
            }
            a[i] += 1;
            if (a[i] as usize) < weights[i].len() {
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}
