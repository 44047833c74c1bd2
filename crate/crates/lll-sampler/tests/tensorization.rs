mod common;

use common::{all_assignments, brute_law, mixed_two_var};
use lll_sampler::kernels::tape::{Label, Tape};
use lll_sampler::marking::{ConstructOptions, UniformConstants, UNIFORM};
use lll_sampler::tensorization::*;
use lll_sampler::verify::random_instance;
use lll_sampler::{AtomicConstraint, AtomicCsp, Error, VariableSpec};
use proptest::prelude::*;
use std::collections::HashMap;

const HUFFMAN_DUMP: &str = "\
z0
  [0] w=0.6000000000000001 z1
    [0] w=0.5 z2
      [0] w=0.6666666666666666 leaf 1
      [1] w=0.3333333333333333 leaf 0
    [1] w=0.4999999999999999 leaf 2
  [1] w=0.4 leaf 3
";

#[test]
fn huffman_golden_dump() {
    let t = huffman_tensorize(&[0.1, 0.2, 0.3, 0.4]).unwrap();
    assert_eq!(t.dump(None), HUFFMAN_DUMP);
    let lengths: Vec<usize> = (0..4).map(|q| t.path(q).len()).collect();
    assert_eq!(lengths, vec![3, 3, 2, 1]);
}

#[test]
fn huffman_rejects_bad_weights() {
    assert!(huffman_tensorize(&[]).is_err());
    assert!(huffman_tensorize(&[0.5, 0.0, 0.5]).is_err());
    let single = huffman_tensorize(&[1.0]).unwrap();
    assert_eq!(single.num_values(), 1);
}

#[test]
fn balanced_trees_and_levels() {
    let t = balanced_tree(5).unwrap();
    assert_eq!(t.depth(), 3);
    assert_eq!(t.internal_nodes().len(), 4);
    assert!((0..5).all(|q| (t.leaf_product(q) - 0.2).abs() < 1e-15));
    let paths: Vec<usize> = (0..5).map(|q| t.path(q).len()).collect();
    assert_eq!(paths, vec![3, 3, 2, 2, 2]);
    assert!(balanced_tree(1).is_err());
}

#[test]
fn depth_and_r_match_integer_arithmetic() {
    for q in 2usize..=4096 {
        let (depth, r) = depth_and_r(q);
        assert!(1usize << depth >= q && 1usize << (depth - 1) < q, "q = {q}");
        // r is the largest integer with 2^(3r/2) <= q.
        assert!(1u128 << (3 * r) <= (q * q) as u128, "q = {q}");
        assert!(1u128 << (3 * (r + 1)) > (q * q) as u128, "q = {q}");
    }
    assert_eq!(depth_and_r(5), (3, 1));
    assert_eq!(depth_and_r(64), (6, 4));
}

#[test]
fn coloring_template_marks_deep_levels() {
    let t = complete_binary_tensorize_with_marking(16, 3).unwrap();
    assert_eq!((t.bounds.depth, t.bounds.r), (4, 2));
    for &z in t.tree.internal_nodes() {
        assert_eq!(t.marks[z], t.tree.level(z) >= 2);
    }
    assert!((t.bounds.log_alpha_bound - 3.0 * (4.0 / 16f64.cbrt()).ln()).abs() < 1e-12);
    assert!(complete_binary_tensorize_with_marking(1, 3).is_err());
    assert!(!coloring_regime(4, 30, 1).ok);
    assert!(coloring_regime(1_000_000, 40, 1).ok);
    assert!(!coloring_regime(5, 2, 3).ok);
}

#[test]
fn tensorize_rejects_mismatched_trees() {
    let csp = mixed_two_var();
    let t0 = balanced_tree(3).unwrap();
    assert!(matches!(tensorize(&csp, vec![t0.clone()]), Err(Error::InvalidInstance(_))));
    assert!(matches!(tensorize(&csp, vec![t0.clone(), balanced_tree(4).unwrap()]), Err(Error::InvalidInstance(_))));
    let t1 = huffman_tensorize(csp.var(1).weights()).unwrap();
    let tc = tensorize(&csp, vec![t0, t1]).unwrap();
    assert_eq!(tc.csp.num_vars(), 5);
    assert_eq!(tc.num_original_vars(), 2);
}

/// Every tensorized assignment, weighted by the node-variable product law,
/// pushed through `trans`; returns the law of the satisfying ones and
/// whether satisfaction was preserved pointwise.
fn push_forward(csp: &AtomicCsp, tc: &TensorizedCsp) -> (HashMap<Vec<u32>, f64>, bool) {
    let domains: Vec<usize> = tc.csp.vars().iter().map(|v| v.domain_size()).collect();
    let mut law: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut consistent = true;
    for a in all_assignments(&domains) {
        let w: f64 = a.iter().enumerate().map(|(z, &x)| tc.csp.var(z).weight(x)).product();
        let orig = tc.trans(&a);
        consistent &= tc.csp.is_satisfying(&a) == csp.is_satisfying(&orig);
        if tc.csp.is_satisfying(&a) {
            *law.entry(orig).or_default() += w;
        }
    }
    let z: f64 = law.values().sum();
    law.values_mut().for_each(|p| *p /= z);
    (law, consistent)
}

#[test]
fn mixed_instance_push_forward() {
    let csp = mixed_two_var();
    let trees = (0..2).map(|v| huffman_tensorize(csp.var(v).weights()).unwrap()).collect();
    let tc = tensorize(&csp, trees).unwrap();
    let (law, consistent) = push_forward(&csp, &tc);
    assert!(consistent);
    let want = brute_law(&csp);
    assert_eq!(law.len(), want.len());
    assert!(want.iter().all(|(k, p)| (law[k] - p).abs() < 1e-12));
}

#[test]
fn uniform_binary_trees() {
    let mut s = Tape::new(4).stream(0, Label::Tensor, 0);
    let n = 20_000;
    let marked = (0..n)
        .filter(|_| {
            let t = uniform_randomized_tensorization(2, &mut s).unwrap();
            assert_eq!(t.case, UniformCase::Binary);
            t.marks[t.tree.root()]
        })
        .count();
    let f = marked as f64 / n as f64;
    assert!((f - UNIFORM.eta).abs() < 5.0 * (UNIFORM.eta * (1.0 - UNIFORM.eta) / n as f64).sqrt(), "{f}");
    assert!(uniform_randomized_tensorization(1, &mut s).is_err());
}

/// The two candidates of each mixture average to the target mean of X, the
/// first is drawn with the stated weight, and block means follow the closed
/// form.
#[test]
fn uniform_mixtures_hit_the_target_mean() {
    for n in 3..=40usize {
        let (first, second, w) = mixture(n).unwrap();
        assert!((0.0..=1.0).contains(&w));
        let target = UNIFORM.eta * (1.0 / n as f64).log2();
        let mut s = Tape::new(n as u64).stream(0, Label::Tensor, 0);
        let mut means: HashMap<String, f64> = HashMap::new();
        let mut hits = 0usize;
        let draws = 4000;
        for _ in 0..draws {
            let t = uniform_randomized_tensorization(n, &mut s).unwrap();
            assert_eq!(t.tree.num_values(), n);
            assert!((0..n as u32).all(|q| (t.tree.leaf_product(q) - 1.0 / n as f64).abs() < 1e-12));
            if let UniformCase::Blocks { x } = t.case {
                assert!((t.mean_x() - blocks_expected_x(n, x)).abs() < 1e-12);
                assert!(blocks_a(n, x) >= 0 && blocks_b(n, x) >= 0);
            }
            if t.case == first {
                hits += 1;
            }
            means.insert(format!("{:?}", t.case), t.mean_x());
        }
        let e = |c: UniformCase| means.get(&format!("{c:?}")).copied();
        match (e(first), e(second)) {
            (Some(a), Some(b)) => assert!((w * a + (1.0 - w) * b - target).abs() < 1e-9, "n = {n}"),
            (Some(a), None) => assert!((a - target).abs() < 1e-9 || w > 0.99, "n = {n}"),
            (None, Some(b)) => assert!((b - target).abs() < 1e-9 || w < 0.01, "n = {n}"),
            (None, None) => unreachable!(),
        }
        let sd = (w * (1.0 - w) / draws as f64).sqrt();
        assert!((hits as f64 / draws as f64 - w).abs() <= 5.0 * sd + 1e-9, "n = {n}");
    }
}

#[test]
fn block_parameters_stay_in_range() {
    for n in 8..=200usize {
        let r = block_r(n);
        for x in [r, r + 1] {
            assert!(x >= 1 && x <= n && blocks_a(n, x) >= 0 && blocks_b(n, x) >= 0, "n = {n}, x = {x}");
            assert_eq!(blocks_a(n, x) as usize * x + blocks_b(n, x) as usize * (x + 1), n);
        }
    }
}

#[test]
fn numeric_facts_hold() {
    let report = verify_numeric_facts();
    assert!(report.pass, "{:?}", report.failures().collect::<Vec<_>>());
    assert!(report.checks.len() > 40);
    let t1 = tilt_t1(&UNIFORM);
    let t2 = tilt_t2(&UNIFORM);
    assert!((1.1659..=1.1660).contains(&t1), "{t1}");
    assert!((1.0035..=1.0036).contains(&t2), "{t2}");
    assert_eq!(round4(t1), 1.1659);
    assert_eq!(round4(1.00355), 1.0036);
}

#[test]
fn numeric_facts_detect_a_wrong_constant() {
    let bad = UniformConstants { tau1: 0.4, ..UNIFORM };
    let report = verify_numeric_facts_with(&bad);
    assert!(!report.pass);
    assert!(report.failures().any(|c| c.name.contains("x = 8")), "{:?}", report.failures().collect::<Vec<_>>());
}

#[test]
fn uniform_construction_on_a_small_instance() {
    let csp = AtomicCsp::new(
        vec![VariableSpec::uniform(3), VariableSpec::uniform(4), VariableSpec::uniform(2), VariableSpec::uniform(5)],
        vec![AtomicConstraint::new(vec![0, 1, 3], vec![2, 0, 4]), AtomicConstraint::new(vec![1, 2], vec![3, 1])],
    )
    .unwrap();
    let opts = ConstructOptions { strict: false, ..ConstructOptions::default() };
    let out = construct_uniform(&csp, 3, &opts).unwrap();
    assert_eq!(out.trees.len(), 4);
    let tc = &out.tensorized;
    assert_eq!(tc.csp.measures().m, 2);
    assert_eq!(out.marking.len(), tc.csp.num_vars());
    let (law, consistent) = push_forward(&csp, tc);
    assert!(consistent);
    let want = brute_law(&csp);
    assert!(want.iter().all(|(k, p)| (law[k] - p).abs() < 1e-12));
    let weighted = mixed_two_var();
    assert!(matches!(construct_uniform(&weighted, 0, &opts), Err(Error::Regime(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn huffman_leaf_products_and_sibling_ratio(raw in prop::collection::vec(0.01f64..1.0, 2..12)) {
        let z: f64 = raw.iter().sum();
        let pmf: Vec<f64> = raw.iter().map(|x| x / z).collect();
        let t = huffman_tensorize(&pmf).unwrap();
        for (q, &p) in pmf.iter().enumerate() {
            prop_assert!((t.leaf_product(q as u32) - p).abs() <= 1e-12 * p.max(1e-300) + 1e-15);
        }
        let kappa = pmf.iter().cloned().fold(0.0, f64::max) / pmf.iter().cloned().fold(1.0, f64::min);
        prop_assert!(t.max_sibling_ratio() <= kappa.max(2.0) * (1.0 + 1e-12));
        prop_assert!(t.nodes().iter().filter(|n| !n.is_leaf()).all(|n| n.children.len() == 2));
    }

    #[test]
    fn tensorization_preserves_measures_and_law(seed in any::<u64>()) {
        let mut s = Tape::new(seed).stream(0, Label::Marking, 0);
        let csp = random_instance(&mut s, 4, 3, 4, 3, true).unwrap();
        let trees = (0..4).map(|v| huffman_tensorize(csp.var(v).weights()).unwrap()).collect();
        let tc = tensorize(&csp, trees).unwrap();
        let (a, b) = (csp.measures(), tc.csp.measures());
        prop_assert_eq!((a.m, a.delta, a.d), (b.m, b.delta, b.d));
        prop_assert!(tc.csp.vars().iter().all(|v| v.domain_size() <= 2));
        for c in 0..a.m {
            let (x, y) = (csp.log_falsify_prob(c), tc.csp.log_falsify_prob(c));
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        let want = brute_law(&csp);
        if !want.is_empty() {
            let (law, consistent) = push_forward(&csp, &tc);
            prop_assert!(consistent);
            prop_assert_eq!(law.len(), want.len());
            for (k, p) in &want {
                prop_assert!((law[k] - p).abs() <= 1e-12);
            }
        }
    }
}
