use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    /// Total probability of the leaves below this node.
    pub mass: f64,
    /// Ordered children; the index of a child is the node variable's value.
    pub children: Vec<usize>,
    pub leaf_value: Option<u32>,
}

impl TreeNode {
    pub fn leaf(mass: f64, value: Option<u32>) -> Self {
        Self { mass, children: Vec::new(), leaf_value: value }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// A rooted tree whose leaves are the domain values and whose edge weights
/// `mass(child)/mass(parent)` multiply to each value's probability.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorTree {
    nodes: Vec<TreeNode>,
    root: usize,
    parent: Vec<Option<(usize, usize)>>,
    leaf_of: Vec<usize>,
    internal: Vec<usize>,
    level: Vec<usize>,
}

impl TensorTree {
    /// Validates the arena and indexes it. Unlabelled leaves are labelled
    /// 0, 1, ... left to right; masses are normalized by the root mass.
    pub fn from_arena(mut nodes: Vec<TreeNode>, root: usize) -> Result<Self> {
        let bad = |msg: String| Error::InvalidInstance(format!("malformed tree: {msg}"));
        if root >= nodes.len() {
            return Err(bad("root out of range".into()));
        }
        let total = nodes[root].mass;
        if total.is_nan() || total <= 0.0 {
            return Err(bad("root mass is not positive".into()));
        }
        let mut parent = vec![None; nodes.len()];
        let mut level = vec![usize::MAX; nodes.len()];
        let mut internal = Vec::new();
        let mut leaves_in_order = Vec::new();
        // Breadth-first for the internal order, depth-first for leaf order.
        let mut queue = VecDeque::from([root]);
        level[root] = 0;
        while let Some(z) = queue.pop_front() {
            if !nodes[z].is_leaf() {
                internal.push(z);
            }
            for (pos, &c) in nodes[z].children.iter().enumerate() {
                if c >= nodes.len() || level[c] != usize::MAX {
                    return Err(bad(format!("node {c} is out of range or has two parents")));
                }
                parent[c] = Some((z, pos));
                level[c] = level[z] + 1;
                queue.push_back(c);
            }
        }
        let mut stack = vec![root];
        while let Some(z) = stack.pop() {
            if nodes[z].is_leaf() {
                leaves_in_order.push(z);
            }
            stack.extend(nodes[z].children.iter().rev());
        }
        if level.contains(&usize::MAX) {
            return Err(bad("unreachable nodes".into()));
        }
        let num_leaves = leaves_in_order.len();
        let mut leaf_of = vec![usize::MAX; num_leaves];
        for (pos, &z) in leaves_in_order.iter().enumerate() {
            let value = *nodes[z].leaf_value.get_or_insert(pos as u32) as usize;
            if value >= num_leaves || leaf_of[value] != usize::MAX {
                return Err(bad(format!("leaf value {value} repeated or out of range")));
            }
            leaf_of[value] = z;
        }
        for node in &mut nodes {
            if node.mass.is_nan() || node.mass <= 0.0 {
                return Err(bad("non-positive node mass".into()));
            }
            node.mass /= total;
        }
        for &z in &internal {
            let s: f64 = nodes[z].children.iter().map(|&c| nodes[c].mass).sum();
            if (s - nodes[z].mass).abs() > 1e-9 * nodes[z].mass.max(1e-300) {
                return Err(bad(format!("children of node {z} do not add up to its mass")));
            }
        }
        Ok(Self { nodes, root, parent, leaf_of, internal, level })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, z: usize) -> &TreeNode {
        &self.nodes[z]
    }

    pub fn num_values(&self) -> usize {
        self.leaf_of.len()
    }

    /// Internal nodes in breadth-first order from the root.
    pub fn internal_nodes(&self) -> &[usize] {
        &self.internal
    }

    /// Distance from the root.
    pub fn level(&self, z: usize) -> usize {
        self.level[z]
    }

    pub fn depth(&self) -> usize {
        self.level.iter().copied().max().unwrap_or(0)
    }

    pub fn leaf_of(&self, q: u32) -> usize {
        self.leaf_of[q as usize]
    }

    /// `W(z → children[pos])`.
    pub fn weight(&self, z: usize, pos: usize) -> f64 {
        self.nodes[self.nodes[z].children[pos]].mass / self.nodes[z].mass
    }

    pub fn child_weights(&self, z: usize) -> Vec<f64> {
        (0..self.nodes[z].children.len()).map(|pos| self.weight(z, pos)).collect()
    }

    /// Internal nodes from the root towards value `q`, with the child taken
    /// at each.
    pub fn path(&self, q: u32) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut z = self.leaf_of(q);
        while let Some((p, pos)) = self.parent[z] {
            out.push((p, pos));
            z = p;
        }
        out.reverse();
        out
    }

    pub fn leaf_product(&self, q: u32) -> f64 {
        self.path(q).iter().map(|&(z, pos)| self.weight(z, pos)).product()
    }

    /// Walks from the root, asking `choose` for the child index at each
    /// internal node, and returns the leaf's value.
    pub fn descend(&self, mut choose: impl FnMut(usize) -> usize) -> u32 {
        let mut z = self.root;
        while !self.nodes[z].is_leaf() {
            z = self.nodes[z].children[choose(z)];
        }
        self.nodes[z].leaf_value.expect("leaves are labelled")
    }

    /// Largest sibling weight ratio over all internal nodes.
    pub fn max_sibling_ratio(&self) -> f64 {
        self.internal
            .iter()
            .filter(|&&z| self.nodes[z].children.len() >= 2)
            .map(|&z| {
                let w = self.child_weights(z);
                let max = w.iter().cloned().fold(f64::MIN, f64::max);
                let min = w.iter().cloned().fold(f64::MAX, f64::min);
                max / min
            })
            .fold(1.0, f64::max)
    }

    /// Relabels leaves: the leaf currently holding value `i` gets `perm[i]`.
    pub fn relabel(&mut self, perm: &[u32]) {
        assert_eq!(perm.len(), self.leaf_of.len());
        let old = self.leaf_of.clone();
        for (i, &z) in old.iter().enumerate() {
            self.nodes[z].leaf_value = Some(perm[i]);
            self.leaf_of[perm[i] as usize] = z;
        }
    }

    /// Indented text dump. Internal nodes are named `z<i>` by breadth-first
    /// index; `marks` is indexed by node id.
    pub fn dump(&self, marks: Option<&[bool]>) -> String {
        let mut name = vec![usize::MAX; self.nodes.len()];
        for (i, &z) in self.internal.iter().enumerate() {
            name[z] = i;
        }
        let mut out = String::new();
        self.dump_node(&mut out, self.root, 0, &name, marks);
        out
    }

    fn dump_node(&self, out: &mut String, z: usize, indent: usize, name: &[usize], marks: Option<&[bool]>) {
        let node = &self.nodes[z];
        if node.is_leaf() {
            let _ = writeln!(out, "leaf {}", node.leaf_value.unwrap_or(u32::MAX));
            return;
        }
        let marked = marks.is_some_and(|m| m[z]);
        let _ = writeln!(out, "z{}{}", name[z], if marked { " marked" } else { "" });
        for pos in 0..node.children.len() {
            let _ = write!(out, "{:width$}[{pos}] w={} ", "", self.weight(z, pos), width = indent + 2);
            self.dump_node(out, node.children[pos], indent + 2, name, marks);
        }
    }
}

#[derive(PartialEq)]
struct HeapItem {
    mass: f64,
    order: usize,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    // Reversed so the max-heap pops the lightest, oldest item first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.mass.total_cmp(&self.mass).then(other.order.cmp(&self.order))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Repeatedly merges the two lightest items of `items` (ties: earliest
/// first) under new nodes pushed to `arena`. Children are stored heavier
/// first. Returns the root.
pub(crate) fn huffman_over(arena: &mut Vec<TreeNode>, items: &[usize]) -> usize {
    assert!(!items.is_empty());
    let mut heap: BinaryHeap<HeapItem> =
        items.iter().enumerate().map(|(order, &node)| HeapItem { mass: arena[node].mass, order, node }).collect();
    let mut order = items.len();
    while heap.len() > 1 {
        let a = heap.pop().unwrap();
        let b = heap.pop().unwrap();
        // b is at least as heavy; on equal mass a was created first.
        let children = if b.mass > a.mass { vec![b.node, a.node] } else { vec![a.node, b.node] };
        arena.push(TreeNode { mass: a.mass + b.mass, children, leaf_value: None });
        heap.push(HeapItem { mass: a.mass + b.mass, order, node: arena.len() - 1 });
        order += 1;
    }
    heap.pop().unwrap().node
}

/// Huffman-style tensorization of a strictly positive pmf.
pub fn huffman_tensorize(pmf: &[f64]) -> Result<TensorTree> {
    if pmf.is_empty() {
        return Err(Error::InvalidInstance("huffman_tensorize: empty pmf".into()));
    }
    if pmf.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidInstance("huffman_tensorize: weights must be positive".into()));
    }
    let mut arena: Vec<TreeNode> =
        pmf.iter().enumerate().map(|(q, &p)| TreeNode::leaf(p, Some(q as u32))).collect();
    let root = if pmf.len() == 1 {
        arena.push(TreeNode { mass: pmf[0], children: vec![0], leaf_value: None });
        1
    } else {
        let items: Vec<usize> = (0..pmf.len()).collect();
        huffman_over(&mut arena, &items)
    };
    TensorTree::from_arena(arena, root)
}

/// Pushes a balanced subtree with `leaves` unlabelled leaves of unit mass;
/// the left child receives the larger half.
pub(crate) fn balanced_into(arena: &mut Vec<TreeNode>, leaves: usize) -> usize {
    assert!(leaves >= 1);
    if leaves == 1 {
        arena.push(TreeNode::leaf(1.0, None));
        return arena.len() - 1;
    }
    let left = balanced_into(arena, leaves.div_ceil(2));
    let right = balanced_into(arena, leaves / 2);
    arena.push(TreeNode { mass: leaves as f64, children: vec![left, right], leaf_value: None });
    arena.len() - 1
}

/// Balanced binary tree over `n ≥ 2` uniform values, labelled left to right.
pub fn balanced_tree(n: usize) -> Result<TensorTree> {
    if n < 2 {
        return Err(Error::InvalidInstance("balanced_tree needs at least two leaves".into()));
    }
    let mut arena = Vec::new();
    let root = balanced_into(&mut arena, n);
    TensorTree::from_arena(arena, root)
}

/// Tree shape used to spell out the fixed small constructions.
#[derive(Clone, Debug)]
pub enum Shape {
    Leaf,
    Node(Vec<Shape>),
}

impl Shape {
    pub fn leaves(&self) -> usize {
        match self {
            Shape::Leaf => 1,
            Shape::Node(cs) => cs.iter().map(Shape::leaves).sum(),
        }
    }

    fn push(&self, arena: &mut Vec<TreeNode>) -> usize {
        match self {
            Shape::Leaf => {
                arena.push(TreeNode::leaf(1.0, None));
            }
            Shape::Node(cs) => {
                let children: Vec<usize> = cs.iter().map(|c| c.push(arena)).collect();
                arena.push(TreeNode { mass: self.leaves() as f64, children, leaf_value: None });
            }
        }
        arena.len() - 1
    }

    /// Uniform-mass tree with leaves labelled left to right.
    pub fn build(&self) -> Result<TensorTree> {
        let mut arena = Vec::new();
        let root = self.push(&mut arena);
        TensorTree::from_arena(arena, root)
    }
}
