use super::tensorize::{tensorize, TensorizedCsp};
use super::tree::{balanced_into, huffman_over, Shape, TensorTree, TreeNode};
use crate::csp::AtomicCsp;
use crate::error::{Error, Result};
use crate::kernels::tape::{Label, Tape, TapeStream};
use crate::marking::{
    check_theorem_conditions, moser_tardos_outcome, uniform_events, uniform_regime, ConditionReport,
    ConstructOptions, Marking, RegimeCheck, UNIFORM,
};
use serde::Serialize;
use std::cell::RefCell;

/// Which construction produced a tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UniformCase {
    /// Two leaves; the root is marked with probability η.
    Binary,
    /// One of the two fixed small constructions (`left` or not) for N in 3..=7.
    Small { left: bool },
    /// Balanced subtrees of `x` and `x + 1` leaves under a marked top tree.
    Blocks { x: usize },
}

#[derive(Clone, Debug)]
pub struct UniformTree {
    pub tree: TensorTree,
    /// Indexed by tree node id.
    pub marks: Vec<bool>,
    pub case: UniformCase,
}

impl UniformTree {
    /// X(q): base-2 log of the product of marked edge weights towards `q`.
    pub fn x(&self, q: u32) -> f64 {
        x_of(&self.tree, &self.marks, q)
    }

    /// Mean of X over the leaves.
    pub fn mean_x(&self) -> f64 {
        mean_x(&self.tree, &self.marks)
    }
}

pub fn x_of(tree: &TensorTree, marks: &[bool], q: u32) -> f64 {
    tree.path(q).iter().filter(|&&(z, _)| marks[z]).map(|&(z, pos)| tree.weight(z, pos).log2()).sum()
}

pub fn mean_x(tree: &TensorTree, marks: &[bool]) -> f64 {
    let n = tree.num_values();
    (0..n as u32).map(|q| x_of(tree, marks, q)).sum::<f64>() / n as f64
}

/// `A(N, x) = ⌊N/x⌋(x+1) − N`, the number of `x`-leaf blocks.
pub fn blocks_a(n: usize, x: usize) -> i64 {
    (n / x) as i64 * (x as i64 + 1) - n as i64
}

/// `B(N, x) = N − ⌊N/x⌋x`, the number of `(x+1)`-leaf blocks.
pub fn blocks_b(n: usize, x: usize) -> i64 {
    n as i64 - (n / x) as i64 * x as i64
}

/// `⌊N^{1−η}⌋`.
pub fn block_r(n: usize) -> usize {
    (n as f64).powf(1.0 - UNIFORM.eta).floor() as usize
}

/// Closed-form mean of X over the leaves of the `x`-block construction.
pub fn blocks_expected_x(n: usize, x: usize) -> f64 {
    let (a, b, nf, xf) = (blocks_a(n, x) as f64, blocks_b(n, x) as f64, n as f64, x as f64);
    (a * xf * (xf / nf).log2() + b * (xf + 1.0) * ((xf + 1.0) / nf).log2()) / nf
}

fn leaf() -> Shape {
    Shape::Leaf
}

fn node(cs: Vec<Shape>) -> Shape {
    Shape::Node(cs)
}

fn pair() -> Shape {
    node(vec![leaf(), leaf()])
}

/// The two fixed constructions for `n` in 3..=7 as (shape, marked
/// breadth-first internal indices).
fn small_pair(n: usize) -> [(Shape, &'static [usize]); 2] {
    match n {
        3 => {
            let s = node(vec![pair(), leaf()]);
            [(s.clone(), &[0, 1]), (s, &[0])]
        }
        4 => {
            let s = node(vec![pair(), pair()]);
            [(s.clone(), &[0]), (s, &[0, 1, 2])]
        }
        5 => {
            let s = node(vec![node(vec![pair(), leaf()]), pair()]);
            [(s.clone(), &[0, 1]), (s, &[1, 2, 3])]
        }
        6 => [
            (node(vec![node(vec![pair(), pair()]), pair()]), &[0, 1]),
            (node(vec![node(vec![pair(), leaf()]), node(vec![pair(), leaf()])]), &[0]),
        ],
        7 => {
            let s = node(vec![node(vec![pair(), pair()]), node(vec![pair(), leaf()])]);
            [(s.clone(), &[0, 1]), (s, &[1, 2, 3, 4, 5])]
        }
        _ => unreachable!("small_pair called with n = {n}"),
    }
}

fn build_marked(shape: &Shape, marked_bfs: &[usize]) -> Result<(TensorTree, Vec<bool>)> {
    let tree = shape.build()?;
    let mut marks = vec![false; tree.nodes().len()];
    for &i in marked_bfs {
        marks[tree.internal_nodes()[i]] = true;
    }
    Ok((tree, marks))
}

fn build_blocks(n: usize, x: usize) -> Result<(TensorTree, Vec<bool>)> {
    let (a, b) = (blocks_a(n, x), blocks_b(n, x));
    if x < 1 || x > n || a < 0 || b < 0 {
        return Err(Error::Invariant(format!("block counts invalid for N = {n}, x = {x}: A = {a}, B = {b}")));
    }
    let mut arena: Vec<TreeNode> = Vec::new();
    let mut blocks = Vec::new();
    for size in std::iter::repeat_n(x, a as usize).chain(std::iter::repeat_n(x + 1, b as usize)) {
        blocks.push(balanced_into(&mut arena, size));
    }
    let first_top = arena.len();
    let root = huffman_over(&mut arena, &blocks);
    let tree = TensorTree::from_arena(arena, root)?;
    let marks = (0..tree.nodes().len()).map(|z| z >= first_top).collect();
    Ok((tree, marks))
}

/// Mixture weight of the first candidate so the mean of X hits `target`.
fn mix_weight(e_first: f64, e_second: f64, target: f64) -> Result<f64> {
    let w = (e_second - target) / (e_second - e_first);
    if !(-1e-12..=1.0 + 1e-12).contains(&w) {
        return Err(Error::Invariant(format!(
            "mixture weight {w} outside [0, 1] (means {e_first}, {e_second}, target {target})"
        )));
    }
    Ok(w.clamp(0.0, 1.0))
}

/// The two candidates and the probability of the first, for `n ≥ 3`.
pub fn mixture(n: usize) -> Result<(UniformCase, UniformCase, f64)> {
    let target = UNIFORM.eta * (1.0 / n as f64).log2();
    if n <= 7 {
        let [(s0, m0), (s1, m1)] = small_pair(n);
        let (t0, k0) = build_marked(&s0, m0)?;
        let (t1, k1) = build_marked(&s1, m1)?;
        let w = mix_weight(mean_x(&t0, &k0), mean_x(&t1, &k1), target)?;
        return Ok((UniformCase::Small { left: true }, UniformCase::Small { left: false }, w));
    }
    let r = block_r(n);
    let (lo, hi) = if blocks_expected_x(n, r) >= target { (r - 1, r) } else { (r, r + 1) };
    let w = mix_weight(blocks_expected_x(n, lo), blocks_expected_x(n, hi), target)?;
    Ok((UniformCase::Blocks { x: lo }, UniformCase::Blocks { x: hi }, w))
}

/// Randomized tree and node marks for a uniform domain of size `n ≥ 2`,
/// drawing from `stream`: one choice deviate, then a leaf permutation.
pub fn uniform_randomized_tensorization(n: usize, stream: &mut TapeStream) -> Result<UniformTree> {
    if n < 2 {
        return Err(Error::Contract(format!("uniform tensorization needs N >= 2, got {n}")));
    }
    if n == 2 {
        let (tree, _) = build_marked(&pair(), &[])?;
        let mut marks = vec![false; tree.nodes().len()];
        marks[tree.root()] = stream.bernoulli(UNIFORM.eta);
        return Ok(UniformTree { tree, marks, case: UniformCase::Binary });
    }
    let (first, second, w) = mixture(n)?;
    let case = if stream.next_f64() < w { first } else { second };
    let (mut tree, marks) = match case {
        UniformCase::Small { left } => {
            let [a, b] = small_pair(n);
            let (shape, m) = if left { a } else { b };
            build_marked(&shape, m)?
        }
        UniformCase::Blocks { x } => build_blocks(n, x)?,
        UniformCase::Binary => unreachable!(),
    };
    tree.relabel(&stream.permutation(n));
    Ok(UniformTree { tree, marks, case })
}

/// Trees, tensorized CSP and marking for an instance with uniform domains.
#[derive(Clone, Debug)]
pub struct UniformConstruction {
    pub trees: Vec<UniformTree>,
    pub tensorized: TensorizedCsp,
    pub marking: Marking,
    pub report: ConditionReport,
    pub regime: RegimeCheck,
    pub attempts: u32,
    pub resamplings: u64,
    pub valid: bool,
}

fn degenerate_tree() -> Result<UniformTree> {
    let arena = vec![TreeNode::leaf(1.0, Some(0)), TreeNode { mass: 1.0, children: vec![0], leaf_value: None }];
    Ok(UniformTree { tree: TensorTree::from_arena(arena, 1)?, marks: vec![false, false], case: UniformCase::Binary })
}

/// Per-constraint deviation events of the uniform construction.
pub fn uniform_construction_event(csp: &AtomicCsp, trees: &[Option<UniformTree>], c: usize) -> bool {
    let con = csp.constraint(c);
    let mut sum_x = 0.0;
    for (v, f) in con.iter() {
        match &trees[v] {
            Some(t) => sum_x += t.x(f),
            None => return false,
        }
    }
    let bits = -csp.log_falsify_prob(c) / std::f64::consts::LN_2;
    let (lower, upper) = uniform_events(sum_x, bits);
    lower || upper
}

pub fn construct_uniform(csp: &AtomicCsp, seed: u64, opts: &ConstructOptions) -> Result<UniformConstruction> {
    for (v, spec) in csp.vars().iter().enumerate() {
        if !spec.is_uniform() {
            return Err(Error::Regime(format!("variable {v} is not uniformly distributed")));
        }
    }
    let meas = csp.measures();
    let regime = uniform_regime(&meas);
    if opts.strict && !regime.ok {
        return Err(Error::Regime(regime.describe(&meas)));
    }
    let tape = Tape::new(seed);
    let n = csp.num_vars();
    let event_vars: Vec<Vec<usize>> = csp.constraints().iter().map(|c| c.vbl.clone()).collect();
    let cap = opts.mt_cap_factor.saturating_mul(event_vars.len() as u64);
    let mut resamplings = 0;
    let mut last = None;
    for attempt in 0..opts.retry_cap.max(1) {
        let failure = RefCell::new(None);
        let mut streams: Vec<Option<TapeStream>> = vec![None; n];
        let out = moser_tardos_outcome(
            n,
            &event_vars,
            |v| {
                let size = csp.var(v).domain_size();
                let built = if size == 1 {
                    degenerate_tree()
                } else {
                    let s = streams[v].get_or_insert_with(|| tape.stream(v as i64, Label::Tensor, attempt as u64));
                    uniform_randomized_tensorization(size, s)
                };
                built.map_err(|e| failure.replace(Some(e))).ok()
            },
            |c, trees: &[Option<UniformTree>]| uniform_construction_event(csp, trees, c),
            cap,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        resamplings += out.stats.resamplings;
        let events_clear =
            out.converged && (0..event_vars.len()).all(|c| !uniform_construction_event(csp, &out.state, c));
        let trees: Vec<UniformTree> = out.state.into_iter().map(|t| t.expect("no construction failure")).collect();
        let tensorized = tensorize(csp, trees.iter().map(|t| t.tree.clone()).collect())?;
        let node_marks: Vec<Vec<bool>> = trees.iter().map(|t| t.marks.clone()).collect();
        let marking = tensorized.marking_from_node_marks(&node_marks);
        let report = check_theorem_conditions(&tensorized.csp, &marking);
        let valid = events_clear && report.pass;
        let built = UniformConstruction {
            trees,
            tensorized,
            marking,
            report,
            regime: regime.clone(),
            attempts: attempt + 1,
            resamplings,
            valid,
        };
        if valid {
            return Ok(built);
        }
        last = Some(built);
    }
    if opts.strict {
        Err(Error::Budget(format!("uniform construction failed after {} attempts", opts.retry_cap)))
    } else {
        Ok(last.expect("at least one attempt"))
    }
}
