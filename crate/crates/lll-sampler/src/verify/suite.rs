use super::law::enumerate_law;
use crate::csp::{AtomicConstraint, AtomicCsp, PartialAssignment, VariableSpec, STAR};
use crate::error::{Error, Result};
use crate::kernels::component::component;
use crate::kernels::marginal::{exact_component_marginal, DEFAULT_TERM_BUDGET};
use crate::kernels::tape::{Label, Tape, TapeStream, AUX_TIME};
use crate::marking::Marking;
use crate::tensorization::{huffman_tensorize, tensorize, verify_numeric_facts};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub properties: Vec<PropertyResult>,
    pub pass: bool,
}

/// A random atomic CSP with `n` variables, `m` constraints, domains of size
/// 2..=`max_domain` and arities 1..=`max_arity`. Weights are uniform unless
/// `weighted`.
pub fn random_instance(
    s: &mut TapeStream,
    n: usize,
    m: usize,
    max_domain: usize,
    max_arity: usize,
    weighted: bool,
) -> Result<AtomicCsp> {
    let vars = (0..n)
        .map(|_| {
            let d = 2 + s.next_below(max_domain as u64 - 1) as usize;
            if weighted {
                let raw: Vec<f64> = (0..d).map(|_| 0.1 + s.next_f64()).collect();
                let z: f64 = raw.iter().sum();
                VariableSpec::new(raw.iter().map(|w| w / z).collect())
            } else {
                Ok(VariableSpec::uniform(d))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let constraints = (0..m)
        .map(|_| {
            let k = 1 + s.next_below(max_arity.min(n) as u64) as usize;
            let perm = s.permutation(n);
            let mut vbl: Vec<usize> = perm[..k].iter().map(|&v| v as usize).collect();
            vbl.sort_unstable();
            let falsifying = vbl.iter().map(|&v| s.next_below(vars[v].domain_size() as u64) as u32).collect();
            AtomicConstraint::new(vbl, falsifying)
        })
        .collect();
    AtomicCsp::new(vars, constraints)
}

fn record(r: &mut PropertyResult, ok: bool, detail: impl FnOnce() -> String) {
    r.cases += 1;
    if !ok {
        r.failures += 1;
        if r.first_failure.is_none() {
            r.first_failure = Some(detail());
        }
    }
}

fn component_marginals(seed: u64, rounds: u64) -> Result<PropertyResult> {
    let tape = Tape::new(seed);
    let mut r = PropertyResult {
        name: "component marginal equals the enumerated conditional law".into(),
        cases: 0,
        failures: 0,
        first_failure: None,
    };
    for i in 0..rounds {
        let mut s = tape.stream(AUX_TIME, Label::Marking, i);
        let csp = random_instance(&mut s, 6, 5, 3, 3, true)?;
        let Ok(law) = enumerate_law(&csp) else { continue };
        let n = csp.num_vars();
        let u = s.next_below(n as u64) as usize;
        let marking = Marking::from_bools((0..n).map(|v| v == u || s.bernoulli(0.5)).collect());
        // Fix the other marked variables to a solution's values.
        let sol = &law.support[s.pick(&law.pmf)];
        let mut sigma = PartialAssignment::all_star(n);
        for (v, &x) in sol.iter().enumerate() {
            if marking.is_marked(v) && v != u {
                sigma.set_raw(v, x);
            }
        }
        let comp = component(&csp, &marking, &sigma, u)?;
        let got = exact_component_marginal(&csp, &comp, u, DEFAULT_TERM_BUDGET)?;
        let mut want = vec![0.0; csp.var(u).domain_size()];
        for (a, &p) in law.support.iter().zip(&law.pmf) {
            if (0..n).all(|v| sigma.raw(v) == STAR || sigma.raw(v) == a[v]) {
                want[a[u] as usize] += p;
            }
        }
        let z: f64 = want.iter().sum();
        want.iter_mut().for_each(|w| *w /= z);
        let gap = got.pmf.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        record(&mut r, gap <= 1e-10, || format!("round {i}: gap {gap:e}"));
    }
    Ok(r)
}

fn tensor_preservation(seed: u64, rounds: u64) -> Result<PropertyResult> {
    let tape = Tape::new(seed);
    let mut r = PropertyResult {
        name: "Huffman tensorization preserves the instance measures".into(),
        cases: 0,
        failures: 0,
        first_failure: None,
    };
    for i in 0..rounds {
        let mut s = tape.stream(AUX_TIME, Label::Tensor, i);
        let csp = random_instance(&mut s, 8, 6, 6, 4, true)?;
        let trees = csp.vars().iter().map(|v| huffman_tensorize(v.weights())).collect::<Result<Vec<_>>>()?;
        let outcome = tensorize(&csp, trees);
        let ok = match &outcome {
            Ok(t) => (0..csp.num_constraints()).all(|c| {
                let (a, b) = (csp.log_falsify_prob(c), t.csp.log_falsify_prob(c));
                (a - b).abs() <= 1e-12 * a.abs().max(1.0)
            }),
            Err(_) => false,
        };
        record(&mut r, ok, || format!("round {i}: {:?}", outcome.err()));
    }
    Ok(r)
}

/// Randomized self-checks plus the numeric constants.
pub fn property_suite(seed: u64, rounds: u64) -> Result<SuiteReport> {
    let facts = verify_numeric_facts();
    let mut numeric = PropertyResult {
        name: "numeric constants".into(),
        cases: facts.checks.len() as u64,
        failures: facts.failures().count() as u64,
        first_failure: facts.failures().next().map(|c| c.name.clone()),
    };
    if facts.checks.is_empty() {
        numeric.failures = 1;
    }
    let properties = vec![numeric, component_marginals(seed, rounds)?, tensor_preservation(seed, rounds)?];
    let pass = properties.iter().all(|p| p.failures == 0 && p.cases > 0);
    if properties.iter().any(|p| p.cases == 0) {
        return Err(Error::Invariant("a property ran no cases".into()));
    }
    Ok(SuiteReport { properties, pass })
}
