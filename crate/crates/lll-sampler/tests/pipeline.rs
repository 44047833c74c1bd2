mod common;

use common::{empirical, mixed_two_var, tv, weighted_blocks, wide_instance};
use lll_sampler::frontends::{parse_csp, parse_hypergraph};
use lll_sampler::pipeline::*;
use lll_sampler::verify::enumerate_law;
use lll_sampler::Error;
use std::collections::HashMap;

const K4PLUS: &str = include_str!("../../../instances/k4plus.hg");
const UNIFORM6: &str = include_str!("../../../instances/uniform6.json");

fn forced() -> PipelineOptions {
    PipelineOptions { force: true, seed: 1, ..PipelineOptions::default() }
}

fn law_map(csp: &lll_sampler::AtomicCsp) -> HashMap<Vec<u32>, f64> {
    let law = enumerate_law(csp).unwrap();
    law.support.into_iter().zip(law.pmf).collect()
}

fn assert_exact(p: &Prepared, num: u64) {
    let want = law_map(&p.original);
    let draws = p.draw_many(num, 7, 2).unwrap();
    let d = tv(&empirical(&draws), &want);
    assert!(d <= (want.len() as f64 / num as f64).sqrt(), "{} TV {d}", p.kind);
}

#[test]
fn pipeline_names_round_trip() {
    for k in [PipelineKind::Binary, PipelineKind::General, PipelineKind::Uniform, PipelineKind::Coloring] {
        assert_eq!(k.to_string().parse::<PipelineKind>().unwrap(), k);
    }
    assert!(matches!("fast".parse::<PipelineKind>(), Err(Error::Contract(_))));
    assert!(matches!(
        prepare(PipelineKind::Coloring, &mixed_two_var(), &PipelineOptions::default()),
        Err(Error::Contract(_))
    ));
}

#[test]
fn binary_pipeline_on_weighted_blocks() {
    let csp = weighted_blocks(8);
    assert!(matches!(pipeline_binary(&csp, &PipelineOptions::default()), Err(Error::Regime(_))));
    let p = pipeline_binary(&csp, &forced()).unwrap();
    assert!(p.report.pass && p.construction.valid && !p.construction.repaired);
    assert!(p.marking.count() > 0 && p.tensor.is_none());
    assert_exact(&p, 40_000);
}

#[test]
fn general_pipeline_on_the_mixed_instance() {
    let csp = mixed_two_var();
    let p = pipeline_general(&csp, &forced()).unwrap();
    // A forced fallback only promises a usable marking, not every condition.
    assert!(p.report.pass || p.construction.repaired);
    assert!(p.sampler().is_ok());
    let t = p.tensor.as_ref().unwrap();
    assert_eq!(t.csp.num_vars(), 5);
    assert_exact(&p, 40_000);
}

#[test]
fn uniform_pipeline_on_mixed_domains() {
    let csp = parse_csp(UNIFORM6).unwrap();
    assert!(matches!(pipeline_uniform(&csp, &PipelineOptions::default()), Err(Error::Regime(_))));
    let p = pipeline_uniform(&csp, &forced()).unwrap();
    assert!(p.tensor.is_some() && p.sampler().is_ok());
    assert_exact(&p, 40_000);
    assert!(matches!(pipeline_uniform(&mixed_two_var(), &forced()), Err(Error::Regime(_))));
}

#[test]
fn coloring_pipeline() {
    let h = parse_hypergraph(K4PLUS).unwrap();
    assert!(matches!(pipeline_coloring(&h, 5, &PipelineOptions::default()), Err(Error::Regime(_))));
    let p = pipeline_coloring(&h, 5, &forced()).unwrap();
    assert_eq!(law_map(&p.original).len(), 480);
    assert_exact(&p, 40_000);
    let draws = p.draw_many(200, 3, 1).unwrap();
    for a in &draws {
        assert!(h.edges().iter().all(|e| e.iter().any(|&v| a[v] != a[e[0]])));
    }
}

#[test]
fn draws_do_not_depend_on_jobs() {
    let p = pipeline_general(&mixed_two_var(), &forced()).unwrap();
    let a = p.draw_many(500, 99, 1).unwrap();
    assert_eq!(a, p.draw_many(500, 99, 4).unwrap());
    assert_ne!(a, p.draw_many(500, 100, 1).unwrap());
}

#[test]
fn wide_instance_is_in_regime() {
    let csp = wide_instance();
    let opts = PipelineOptions::default();
    for p in [pipeline_binary(&csp, &opts).unwrap(), pipeline_uniform(&csp, &opts).unwrap()] {
        assert!(p.regime.ok && p.report.pass && p.construction.valid, "{}", p.kind);
        let draws = p.draw_many(20, 5, 2).unwrap();
        assert!(draws.iter().all(|a| csp.is_satisfying(a)));
    }
}
