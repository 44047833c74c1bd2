use super::tree::TensorTree;
use crate::csp::{AtomicConstraint, AtomicCsp, VariableSpec};
use crate::error::{Error, Result};
use crate::marking::Marking;

const NO_VAR: usize = usize::MAX;

/// A CSP over one binary-or-wider decision variable per internal tree node.
#[derive(Clone, Debug)]
pub struct TensorizedCsp {
    pub csp: AtomicCsp,
    pub trees: Vec<TensorTree>,
    /// Per original variable, tree node id → node variable (or `NO_VAR`).
    node_var: Vec<Vec<usize>>,
    /// Per node variable, its (original variable, tree node).
    origin: Vec<(usize, usize)>,
}

impl TensorizedCsp {
    pub fn node_var(&self, v: usize, node: usize) -> Option<usize> {
        let z = self.node_var[v][node];
        (z != NO_VAR).then_some(z)
    }

    pub fn origin(&self, z: usize) -> (usize, usize) {
        self.origin[z]
    }

    pub fn num_original_vars(&self) -> usize {
        self.trees.len()
    }

    /// Reads an original assignment off a full tensorized one by descending
    /// each tree.
    pub fn trans(&self, sigma: &[u32]) -> Vec<u32> {
        self.trees
            .iter()
            .enumerate()
            .map(|(v, tree)| {
                tree.descend(|node| match self.node_var(v, node) {
                    Some(z) => sigma[z] as usize,
                    None => 0,
                })
            })
            .collect()
    }

    /// Lifts per-tree node marks (indexed by tree node id) to a marking of
    /// the node variables.
    pub fn marking_from_node_marks(&self, marks: &[Vec<bool>]) -> Marking {
        let mut m = Marking::none(self.csp.num_vars());
        for (z, &(v, node)) in self.origin.iter().enumerate() {
            if marks[v][node] {
                m.set(z, true);
            }
        }
        m
    }
}

/// Builds the tensorized CSP. Trees must match each variable's law; a
/// single-child root is accepted only for single-value domains and creates
/// no node variable.
pub fn tensorize(csp: &AtomicCsp, trees: Vec<TensorTree>) -> Result<TensorizedCsp> {
    let bad = |msg: String| Error::InvalidInstance(format!("tensorize: {msg}"));
    if trees.len() != csp.num_vars() {
        return Err(bad(format!("{} trees for {} variables", trees.len(), csp.num_vars())));
    }
    let mut vars = Vec::new();
    let mut node_var = Vec::with_capacity(trees.len());
    let mut origin = Vec::new();
    for (v, tree) in trees.iter().enumerate() {
        let spec = csp.var(v);
        if tree.num_values() != spec.domain_size() {
            return Err(bad(format!("tree of variable {v} has {} leaves", tree.num_values())));
        }
        for q in 0..spec.domain_size() as u32 {
            let lp = tree.leaf_product(q);
            if (lp - spec.weight(q)).abs() > 1e-9 {
                return Err(bad(format!("tree of variable {v} gives value {q} mass {lp}")));
            }
        }
        let mut map = vec![NO_VAR; tree.nodes().len()];
        for &node in tree.internal_nodes() {
            let arity = tree.node(node).children.len();
            if arity == 1 && spec.domain_size() == 1 {
                continue;
            }
            if arity < 2 {
                return Err(bad(format!("node {node} of variable {v} has a single child")));
            }
            map[node] = vars.len();
            origin.push((v, node));
            vars.push(VariableSpec::new(tree.child_weights(node))?);
        }
        node_var.push(map);
    }
    let mut constraints = Vec::with_capacity(csp.num_constraints());
    for (ci, c) in csp.constraints().iter().enumerate() {
        let mut vbl = Vec::new();
        let mut falsifying = Vec::new();
        for (v, f) in c.iter() {
            for (node, pos) in trees[v].path(f) {
                let z = node_var[v][node];
                if z != NO_VAR {
                    vbl.push(z);
                    falsifying.push(pos as u32);
                }
            }
        }
        if vbl.is_empty() {
            return Err(Error::Unsatisfiable(format!("constraint {ci} only involves fixed variables")));
        }
        constraints.push(AtomicConstraint::new(vbl, falsifying));
    }
    let out = TensorizedCsp { csp: AtomicCsp::new(vars, constraints)?, trees, node_var, origin };
    check_preservation(csp, &out.csp)?;
    Ok(out)
}

/// |C|, Δ, d and every per-constraint falsifying probability are unchanged.
fn check_preservation(base: &AtomicCsp, tens: &AtomicCsp) -> Result<()> {
    let a = base.measures();
    let b = tens.measures();
    if a.m != b.m || a.delta != b.delta || a.d != b.d {
        return Err(Error::Invariant(format!(
            "tensorization changed (m, Delta, d) from ({}, {}, {}) to ({}, {}, {})",
            a.m, a.delta, a.d, b.m, b.delta, b.d
        )));
    }
    for c in 0..base.num_constraints() {
        let (x, y) = (base.log_falsify_prob(c), tens.log_falsify_prob(c));
        if (x - y).abs() > 1e-12 * x.abs().max(1.0) {
            return Err(Error::Invariant(format!("constraint {c}: ln p changed from {x} to {y}")));
        }
    }
    Ok(())
}
