use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;

/// Wildcard entry of a [`PartialAssignment`].
pub const STAR: u32 = u32::MAX;

const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct VariableSpec {
    weights: Vec<f64>,
}

impl VariableSpec {
    /// Weights must be strictly positive and sum to 1 within 1e-9. They are
    /// stored as given so that instances round-trip exactly.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInstance("empty domain".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidInstance(format!("weight {w} is not strictly positive")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInstance(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size >= 1);
        Self { weights: vec![1.0 / size as f64; size] }
    }

    pub fn domain_size(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, q: u32) -> f64 {
        self.weights[q as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|w| (w - w0).abs() <= 1e-12)
    }

    /// Largest ratio between two weights of this distribution.
    pub fn kappa(&self) -> f64 {
        let max = self.weights.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.weights.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomicConstraint {
    pub vbl: Vec<usize>,
    pub falsifying: Vec<u32>,
}

impl AtomicConstraint {
    pub fn new(vbl: Vec<usize>, falsifying: Vec<u32>) -> Self {
        Self { vbl, falsifying }
    }

    pub fn arity(&self) -> usize {
        self.vbl.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.vbl.iter().copied().zip(self.falsifying.iter().copied())
    }

    /// True iff the full assignment hits the unique falsifying pattern.
    pub fn is_falsified_by(&self, values: &[u32]) -> bool {
        self.iter().all(|(v, f)| values[v] == f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomicCsp {
    vars: Vec<VariableSpec>,
    constraints: Vec<AtomicConstraint>,
    occurs: Vec<Vec<usize>>,
}

impl AtomicCsp {
    pub fn new(vars: Vec<VariableSpec>, constraints: Vec<AtomicConstraint>) -> Result<Self> {
        let n = vars.len();
        let mut occurs = vec![Vec::new(); n];
        let mut seen = vec![usize::MAX; n];
        for (ci, c) in constraints.iter().enumerate() {
            if c.vbl.is_empty() {
                return Err(Error::InvalidInstance(format!("constraint {ci} has arity 0")));
            }
            if c.vbl.len() != c.falsifying.len() {
                return Err(Error::InvalidInstance(format!(
                    "constraint {ci}: {} variables but {} falsifying values",
                    c.vbl.len(),
                    c.falsifying.len()
                )));
            }
            for (v, f) in c.iter() {
                if v >= n {
                    return Err(Error::InvalidInstance(format!(
                        "constraint {ci}: variable {v} out of range (n = {n})"
                    )));
                }
                if seen[v] == ci {
                    return Err(Error::InvalidInstance(format!(
                        "constraint {ci}: variable {v} repeated"
                    )));
                }
                seen[v] = ci;
                if f as usize >= vars[v].domain_size() {
                    return Err(Error::InvalidInstance(format!(
                        "constraint {ci}: value {f} outside the domain of variable {v}"
                    )));
                }
                occurs[v].push(ci);
            }
        }
        Ok(Self { vars, constraints, occurs })
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn vars(&self) -> &[VariableSpec] {
        &self.vars
    }

    pub fn var(&self, v: usize) -> &VariableSpec {
        &self.vars[v]
    }

    pub fn constraints(&self) -> &[AtomicConstraint] {
        &self.constraints
    }

    pub fn constraint(&self, c: usize) -> &AtomicConstraint {
        &self.constraints[c]
    }

    /// Indices of the constraints containing `v`, ascending.
    pub fn constraints_of(&self, v: usize) -> &[usize] {
        &self.occurs[v]
    }

    pub fn weight(&self, v: usize, q: u32) -> f64 {
        self.vars[v].weight(q)
    }

    /// ln of the probability that `c` is falsified under the product measure.
    pub fn log_falsify_prob(&self, c: usize) -> f64 {
        self.constraints[c].iter().map(|(v, f)| self.vars[v].weight(f).ln()).sum()
    }

    pub fn is_satisfying(&self, values: &[u32]) -> bool {
        values.len() == self.num_vars() && !self.constraints.iter().any(|c| c.is_falsified_by(values))
    }

    /// Constraints sharing at least one variable with `c`, including `c` itself.
    pub fn neighbourhood(&self, c: usize) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.constraints[c].vbl.iter().flat_map(|&v| self.occurs[v].iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn measures(&self) -> Measures {
        let k = self.constraints.iter().map(|c| c.arity()).max().unwrap_or(0);
        let d = self.occurs.iter().map(|o| o.len()).max().unwrap_or(0);
        let delta = (0..self.num_constraints()).map(|c| self.neighbourhood(c).len()).max().unwrap_or(0);
        let q = self.vars.iter().map(|v| v.domain_size()).max().unwrap_or(0);
        let log_p = (0..self.num_constraints())
            .map(|c| self.log_falsify_prob(c))
            .fold(f64::NEG_INFINITY, f64::max);
        let kappa = self.vars.iter().map(|v| v.kappa()).fold(1.0, f64::max);
        Measures { n: self.num_vars(), m: self.num_constraints(), k, d, delta, q, log_p, kappa }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measures {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub d: usize,
    pub delta: usize,
    pub q: usize,
    /// ln p; negative infinity for a constraint-free instance.
    pub log_p: f64,
    pub kappa: f64,
}

/// Per-variable value or the wildcard [`STAR`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    values: Vec<u32>,
}

impl PartialAssignment {
    pub fn all_star(n: usize) -> Self {
        Self { values: vec![STAR; n] }
    }

    pub fn from_values(values: Vec<u32>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<u32> {
        let x = self.values[v];
        (x != STAR).then_some(x)
    }

    pub fn raw(&self, v: usize) -> u32 {
        self.values[v]
    }

    pub fn is_star(&self, v: usize) -> bool {
        self.values[v] == STAR
    }

    pub fn set(&mut self, v: usize, value: Option<u32>) {
        self.values[v] = value.unwrap_or(STAR);
    }

    pub fn set_raw(&mut self, v: usize, value: u32) {
        self.values[v] = value;
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// `true` iff every entry of `self` is either `⋆` or equal to `finer`'s entry.
    pub fn covers(&self, finer: &PartialAssignment) -> bool {
        self.values.len() == finer.values.len()
            && self.values.iter().zip(&finer.values).all(|(&a, &b)| a == STAR || a == b)
    }

    pub fn is_valid_for(&self, csp: &AtomicCsp) -> bool {
        self.values.len() == csp.num_vars()
            && self
                .values
                .iter()
                .enumerate()
                .all(|(v, &x)| x == STAR || (x as usize) < csp.var(v).domain_size())
    }
}

impl fmt::Debug for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, &x) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if x == STAR {
                write!(f, "*")?;
            } else {
                write!(f, "{x}")?;
            }
        }
        write!(f, "]")
    }
}

/// Whether `c` can still be falsified by some completion of `sigma`.
pub fn falsifiable_under(c: &AtomicConstraint, sigma: &PartialAssignment) -> bool {
    c.iter().all(|(v, f)| {
        let x = sigma.raw(v);
        x == STAR || x == f
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectedConstraint {
    pub source: usize,
    pub vbl: Vec<usize>,
    pub falsifying: Vec<u32>,
}

impl ProjectedConstraint {
    pub fn of(csp: &AtomicCsp, source: usize, sigma: &PartialAssignment) -> Self {
        let c = csp.constraint(source);
        let (vbl, falsifying) = c.iter().filter(|&(v, _)| sigma.is_star(v)).unzip();
        Self { source, vbl, falsifying }
    }
}

/// The projection of a CSP by a partial assignment: fixed variables carry a
/// point mass and only falsifiable constraints survive, restricted to `⋆`
/// variables.
#[derive(Clone, Debug)]
pub struct ProjectedCsp {
    pub sigma: PartialAssignment,
    pub constraints: Vec<ProjectedConstraint>,
}

impl ProjectedCsp {
    pub fn measures(&self, csp: &AtomicCsp) -> Measures {
        let n = csp.num_vars();
        let mut occ = vec![Vec::new(); n];
        for (i, c) in self.constraints.iter().enumerate() {
            for &v in &c.vbl {
                occ[v].push(i);
            }
        }
        let k = self.constraints.iter().map(|c| c.vbl.len()).max().unwrap_or(0);
        let d = occ.iter().map(|o| o.len()).max().unwrap_or(0);
        let delta = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut nb: Vec<usize> = c.vbl.iter().flat_map(|&v| occ[v].iter().copied()).collect();
                nb.push(i);
                nb.sort_unstable();
                nb.dedup();
                nb.len()
            })
            .max()
            .unwrap_or(0);
        let q = (0..n)
            .map(|v| if self.sigma.is_star(v) { csp.var(v).domain_size() } else { 1 })
            .max()
            .unwrap_or(0);
        let log_p = self
            .constraints
            .iter()
            .map(|c| c.vbl.iter().zip(&c.falsifying).map(|(&v, &f)| csp.weight(v, f).ln()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let kappa = (0..n)
            .filter(|&v| self.sigma.is_star(v))
            .map(|v| csp.var(v).kappa())
            .fold(1.0, f64::max);
        Measures { n, m: self.constraints.len(), k, d, delta, q, log_p, kappa }
    }
}

pub fn project(csp: &AtomicCsp, sigma: &PartialAssignment) -> ProjectedCsp {
    let constraints = (0..csp.num_constraints())
        .filter(|&c| falsifiable_under(csp.constraint(c), sigma))
        .map(|c| ProjectedConstraint::of(csp, c, sigma))
        .collect();
    ProjectedCsp { sigma: sigma.clone(), constraints }
}

/// Substitute variables with a single-value domain into the constraints.
///
/// Such variables are kept (so indices are stable) but no longer occur in any
/// constraint. Constraints they can never falsify are dropped.
pub fn preprocess(csp: &AtomicCsp) -> Result<AtomicCsp> {
    let fixed = |v: usize| csp.var(v).domain_size() == 1;
    if !(0..csp.num_vars()).any(fixed) {
        return Ok(csp.clone());
    }
    let mut out = Vec::with_capacity(csp.num_constraints());
    for (ci, c) in csp.constraints().iter().enumerate() {
        if c.iter().any(|(v, f)| fixed(v) && f != 0) {
            continue;
        }
        let (vbl, falsifying): (Vec<usize>, Vec<u32>) = c.iter().filter(|&(v, _)| !fixed(v)).unzip();
        if vbl.is_empty() {
            return Err(Error::Unsatisfiable(format!(
                "constraint {ci} is falsified by the forced values of its variables"
            )));
        }
        out.push(AtomicConstraint::new(vbl, falsifying));
    }
    AtomicCsp::new(csp.vars().to_vec(), out)
}
