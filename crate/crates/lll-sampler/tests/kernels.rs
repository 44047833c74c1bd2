mod common;

use common::{all_assignments, cnf6, conditional_marginal, valid_marking, weighted_blocks};
use lll_sampler::kernels::tape::{pick_index, Label, Tape, AUX_TIME};
use lll_sampler::kernels::{
    component, coupled_update, exact_component_marginal, rejection_sampling, safe_pmf, Kernel, MarginalMethod,
    SafePmf, Scratch, StepKind, DEFAULT_TERM_BUDGET,
};
use lll_sampler::marking::compute_constants;
use lll_sampler::verify::random_instance;
use lll_sampler::{AtomicConstraint, AtomicCsp, Error, Marking, PartialAssignment, VariableSpec};
use proptest::prelude::*;

#[test]
fn tape_addresses_are_independent_of_draw_order() {
    let tape = Tape::new(9);
    let a = tape.draw_uniform(-5, Label::Layered, 0);
    let _ = tape.draw_uniform(-4, Label::Layered, 0);
    assert_eq!(a, Tape::new(9).draw_uniform(-5, Label::Layered, 0));
    assert_ne!(a, tape.draw_uniform(-5, Label::Layered, 1));
    assert_ne!(a, tape.draw_uniform(-5, Label::Rejection, 0));
    assert_ne!(a, tape.draw_uniform(-6, Label::Layered, 0));
    assert_ne!(a, Tape::new(10).draw_uniform(-5, Label::Layered, 0));
    assert!((0.0..1.0).contains(&a));
}

#[test]
fn tape_streams_are_uniform() {
    let tape = Tape::new(1);
    let mut counts = [0u32; 10];
    for t in 0..100_000 {
        counts[(tape.draw_uniform(t, Label::Layered, 0) * 10.0) as usize] += 1;
    }
    let chi: f64 = counts.iter().map(|&c| (c as f64 - 10_000.0).powi(2) / 10_000.0).sum();
    // 99.99th percentile of chi-square with 9 degrees of freedom.
    assert!(chi < 33.7, "{chi}");
    let mut s = tape.stream(AUX_TIME, Label::Rejection, 0);
    let mut p = s.permutation(50);
    p.sort_unstable();
    assert_eq!(p, (0..50).collect::<Vec<u32>>());
    assert!((0..1000).all(|_| s.next_below(7) < 7));
}

#[test]
fn pick_index_boundaries() {
    let pmf = [0.25, 0.0, 0.75, 0.0];
    assert_eq!(pick_index(&pmf, 0.0), 0);
    assert_eq!(pick_index(&pmf, 0.25), 2);
    assert_eq!(pick_index(&pmf, 0.999_999), 2);
    assert_eq!(pick_index(&pmf, 1.0), 2);
}

#[test]
fn component_of_the_six_variable_formula() {
    let csp = cnf6();
    let m = Marking::from_vars(6, [0, 2]);
    let mut sigma = PartialAssignment::all_star(6);
    sigma.set(2, Some(1));
    let comp = component(&csp, &m, &sigma, 0).unwrap();
    // C0 is satisfied by x2 = 1; nothing else is reachable from x0.
    assert_eq!(comp.vars, vec![0]);
    assert!(comp.constraints.is_empty() && comp.token);
    sigma.set(2, Some(0));
    let comp = component(&csp, &m, &sigma, 0).unwrap();
    // x1 links C0 to C2 once x2 no longer satisfies C0.
    assert_eq!(comp.vars, vec![0, 1, 4, 5]);
    assert_eq!(comp.constraints.len(), 2);
    assert!(comp.token);
    sigma.set(2, None);
    let comp = component(&csp, &m, &sigma, 0).unwrap();
    assert!(!comp.token);
    assert!(matches!(component(&csp, &m, &PartialAssignment::from_values(vec![0; 6]), 0), Err(Error::Contract(_))));
    let mut bad = PartialAssignment::all_star(6);
    bad.set(1, Some(1));
    assert!(matches!(component(&csp, &m, &bad, 0), Err(Error::Contract(_))));
}

#[test]
fn both_marginal_methods_agree_with_brute_force() {
    let csp = cnf6();
    let m = Marking::from_vars(6, [0]);
    let sigma = PartialAssignment::all_star(6);
    let comp = component(&csp, &m, &sigma, 0).unwrap();
    assert_eq!(comp.vars.len(), 6);
    let got = exact_component_marginal(&csp, &comp, 0, DEFAULT_TERM_BUDGET).unwrap();
    assert_eq!(got.method, MarginalMethod::InclusionExclusion);
    assert!(got.terms > 0);
    // 40 solutions; x0 = 1 in 24 of them.
    let want = conditional_marginal(&csp, &sigma, 0);
    assert!((want[1] - 24.0 / 40.0).abs() < 1e-15);
    assert!(got.pmf.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
    // Too many constraints for inclusion-exclusion: fall back to enumeration.
    let mut cons = Vec::new();
    for i in 0..3 {
        for f in [0u32, 3, 6] {
            {
                cons.push(AtomicConstraint::new(vec![i, i + 1, i + 2], vec![f & 1, (f >> 1) & 1, f >> 2]));
            }
        }
    }
    let dense = AtomicCsp::new(vec![VariableSpec::uniform(2); 5], cons).unwrap();
    let sigma = PartialAssignment::all_star(5);
    let comp = component(&dense, &Marking::from_vars(5, [2]), &sigma, 2).unwrap();
    let got = exact_component_marginal(&dense, &comp, 2, DEFAULT_TERM_BUDGET).unwrap();
    assert_eq!(got.method, MarginalMethod::Enumeration);
    let want = conditional_marginal(&dense, &sigma, 2);
    assert!(got.pmf.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
    assert!(matches!(exact_component_marginal(&dense, &comp, 2, 4), Err(Error::Budget(_))));
}

#[test]
fn safe_distribution_from_beta() {
    let s = SafePmf::from_beta(&[0.25, 0.75], 1.1);
    assert!((s.values[0] - (1.0 - 1.1 * 0.75)).abs() < 1e-15);
    assert!((s.values[1] - (1.0 - 1.1 * 0.25)).abs() < 1e-15);
    assert!((s.star - (1.1 - 1.0)).abs() < 1e-12);
    assert_eq!(SafePmf::from_beta(&[0.5, 0.5], 1.0).star, 0.0);
    let csp = weighted_blocks(8);
    assert!(safe_pmf(&csp, &Marking::none(8), 0).is_err());
}

#[test]
fn rejection_sampling_matches_the_component_law() {
    let csp = cnf6();
    let vars: Vec<usize> = (0..6).collect();
    let sigma = PartialAssignment::all_star(6);
    let cons = lll_sampler::csp::project(&csp, &sigma).constraints;
    let law = common::brute_law(&csp);
    let tape = Tape::new(5);
    let mut s = tape.stream(0, Label::Rejection, 0);
    let draws: Vec<Vec<u32>> =
        (0..100_000).map(|_| rejection_sampling(&csp, &vars, &cons, &mut s, 1000).unwrap().values).collect();
    let tv = common::tv(&common::empirical(&draws), &law);
    assert!(tv <= 0.02, "{tv}");
    let unsat = AtomicCsp::new(
        vec![VariableSpec::uniform(2)],
        vec![AtomicConstraint::new(vec![0], vec![0]), AtomicConstraint::new(vec![0], vec![1])],
    )
    .unwrap();
    let cons = lll_sampler::csp::project(&unsat, &PartialAssignment::all_star(1)).constraints;
    assert!(matches!(rejection_sampling(&unsat, &[0], &cons, &mut s, 50), Err(Error::Budget(_))));
}

#[test]
fn unconstrained_updates_are_always_safe() {
    let csp = AtomicCsp::new(vec![VariableSpec::new(vec![0.3, 0.7]).unwrap(); 3], vec![]).unwrap();
    let m = Marking::all(3);
    let kernel = Kernel::new(&csp, &m, 1.0, DEFAULT_TERM_BUDGET);
    let tape = Tape::new(0);
    let mut scratch = Scratch::for_csp(&csp);
    let mut state = PartialAssignment::all_star(3);
    for t in -30..0 {
        assert_eq!(kernel.update(&mut scratch, &mut state, t, &tape).unwrap().kind, StepKind::Safe);
    }
    assert!((0..3).all(|v| !state.is_star(v)));
}

#[test]
fn unmarked_sites_are_left_alone() {
    let csp = weighted_blocks(8);
    let m = Marking::from_vars(8, [1]);
    let state = PartialAssignment::all_star(8);
    let tape = Tape::new(0);
    assert_eq!(coupled_update(&csp, &m, &state, 0, &tape).unwrap(), state);
    let next = coupled_update(&csp, &m, &state, 1, &tape).unwrap();
    assert_eq!((0..8).filter(|&v| !next.is_star(v)).count(), usize::from(!next.is_star(1)));
}

/// Layered draw of a single update, reconstructed from the exact law: the
/// kernel's value distribution over many times must equal the conditional
/// law of the scanned variable.
#[test]
fn concrete_updates_draw_from_the_conditional_law() {
    let csp = weighted_blocks(8);
    let m = valid_marking(&csp);
    let u = m.marked_vars()[0];
    let n = 8i64;
    let mut sigma = PartialAssignment::all_star(8);
    for v in m.marked_vars() {
        sigma.set(v, Some(0));
    }
    let want = conditional_marginal(&csp, &{
        let mut s = sigma.clone();
        s.set(u, None);
        s
    }, u);
    let beta = compute_constants(&csp, &m).unwrap().log_beta.exp();
    let kernel = Kernel::new(&csp, &m, beta, DEFAULT_TERM_BUDGET);
    let tape = Tape::new(77);
    let mut scratch = Scratch::for_csp(&csp);
    let mut counts = [0f64; 2];
    let trials = 200_000;
    for i in 0..trials {
        let mut s = sigma.clone();
        kernel.update(&mut scratch, &mut s, u as i64 - n * (i + 1), &tape).unwrap();
        counts[s.raw(u) as usize] += 1.0;
    }
    let got = counts[1] / trials as f64;
    let sd = (want[1] * (1.0 - want[1]) / trials as f64).sqrt();
    assert!((got - want[1]).abs() < 5.0 * sd, "{got} vs {}", want[1]);
}

fn bounded_pair(n: usize, m: &Marking, seed: u64) -> (PartialAssignment, PartialAssignment) {
    let mut s = Tape::new(seed).stream(AUX_TIME, Label::Rejection, 0);
    let mut real = PartialAssignment::all_star(n);
    let mut bound = PartialAssignment::all_star(n);
    for v in m.marked_vars() {
        let x = s.next_below(2) as u32;
        real.set(v, Some(x));
        if s.bernoulli(0.6) {
            bound.set(v, Some(x));
        }
    }
    (real, bound)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupled_update_preserves_containment(seed in any::<u64>(), t in -10_000i64..0) {
        let csp = weighted_blocks(8);
        let m = valid_marking(&csp);
        let (real, bound) = bounded_pair(8, &m, seed);
        let tape = Tape::new(seed);
        let r = coupled_update(&csp, &m, &real, t, &tape).unwrap();
        let b = coupled_update(&csp, &m, &bound, t, &tape).unwrap();
        prop_assert!(b.covers(&r), "{b:?} vs {r:?}");
    }

    #[test]
    fn component_marginal_matches_brute_force(seed in any::<u64>()) {
        let mut s = Tape::new(seed).stream(AUX_TIME, Label::Marking, 0);
        let csp = random_instance(&mut s, 5, 4, 3, 3, true).unwrap();
        let u = s.next_below(5) as usize;
        let m = Marking::from_bools((0..5).map(|v| v == u || s.bernoulli(0.5)).collect());
        let mut sigma = PartialAssignment::all_star(5);
        for v in m.marked_vars() {
            if v != u {
                sigma.set(v, Some(s.next_below(csp.var(v).domain_size() as u64) as u32));
            }
        }
        let comp = component(&csp, &m, &sigma, u).unwrap();
        let domains: Vec<usize> = csp.vars().iter().map(|v| v.domain_size()).collect();
        let feasible = all_assignments(&domains).iter().any(|a| {
            csp.is_satisfying(a) && (0..5).all(|v| sigma.is_star(v) || sigma.raw(v) == a[v])
        });
        match exact_component_marginal(&csp, &comp, u, DEFAULT_TERM_BUDGET) {
            Ok(_) if !feasible => {}
            Ok(got) => {
                let want = conditional_marginal(&csp, &sigma, u);
                for (a, b) in got.pmf.iter().zip(&want) {
                    prop_assert!((a - b).abs() <= 1e-10);
                }
            }
            Err(Error::Unsatisfiable(_)) => prop_assert!(!feasible),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        }
    }
}

#[test]
fn contradictory_component_is_reported_unsatisfiable() {
    let csp = AtomicCsp::new(
        vec![VariableSpec::new(vec![0.3, 0.3, 0.4]).unwrap(), VariableSpec::new(vec![0.57, 0.43]).unwrap()],
        vec![
            AtomicConstraint::new(vec![0, 1], vec![2, 0]),
            AtomicConstraint::new(vec![1], vec![0]),
            AtomicConstraint::new(vec![1], vec![1]),
        ],
    )
    .unwrap();
    let m = Marking::from_vars(2, [0]);
    let comp = component(&csp, &m, &PartialAssignment::all_star(2), 0).unwrap();
    assert!(matches!(exact_component_marginal(&csp, &comp, 0, DEFAULT_TERM_BUDGET), Err(Error::Unsatisfiable(_))));
}
