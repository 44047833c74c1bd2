use super::naming::Naming;
use crate::csp::{AtomicConstraint, AtomicCsp, VariableSpec};
use crate::error::{Error, Result};
use std::fmt::Write;

/// A k-uniform hypergraph with 0-based vertex ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypergraphInstance {
    num_vertices: usize,
    edges: Vec<Vec<usize>>,
}

impl HypergraphInstance {
    pub fn new(num_vertices: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let bad = |msg: String| Error::InvalidInstance(msg);
        let k = edges.first().map_or(0, |e| e.len());
        for (i, e) in edges.iter().enumerate() {
            if e.len() != k {
                return Err(bad(format!("edge {i} has {} vertices, expected {k}", e.len())));
            }
            if e.is_empty() {
                return Err(bad(format!("edge {i} is empty")));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= num_vertices) {
                return Err(bad(format!("edge {i}: vertex {v} out of range")));
            }
            let mut s = e.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != e.len() {
                return Err(bad(format!("edge {i} repeats a vertex")));
            }
        }
        Ok(Self { num_vertices, edges })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Edge size; 0 for an edgeless graph.
    pub fn k(&self) -> usize {
        self.edges.first().map_or(0, |e| e.len())
    }

    /// Largest number of edges meeting a given edge, the edge included.
    pub fn max_dependency(&self) -> usize {
        let mut incident = vec![Vec::new(); self.num_vertices];
        for (i, e) in self.edges.iter().enumerate() {
            for &v in e {
                incident[v].push(i);
            }
        }
        self.edges
            .iter()
            .map(|e| {
                let mut nb: Vec<usize> = e.iter().flat_map(|&v| incident[v].iter().copied()).collect();
                nb.sort_unstable();
                nb.dedup();
                nb.len()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn naming(&self, q: usize) -> Naming {
        Naming::indexed(self.num_vertices, q)
    }
}

/// Format: `h <nvertices> <nedges> <k>` then one edge per line of 1-based
/// vertex ids. Lines starting with `c` are comments.
pub fn parse_hypergraph(text: &str) -> Result<HypergraphInstance> {
    let err = |line: usize, msg: String| Error::Parse { line, msg };
    let mut header: Option<(usize, usize, usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let Some((n, _, k, _)) = header else {
            if parts.len() != 4 || parts[0] != "h" {
                return Err(err(lineno, format!("expected 'h <vertices> <edges> <k>', got '{line}'")));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(lineno, format!("bad number '{s}'")));
            header = Some((num(parts[1])?, num(parts[2])?, num(parts[3])?, lineno));
            continue;
        };
        if parts.len() != k {
            return Err(err(lineno, format!("edge has {} vertices, expected {k}", parts.len())));
        }
        let mut e = Vec::with_capacity(k);
        for p in parts {
            let v: usize = p.parse().map_err(|_| err(lineno, format!("bad vertex id '{p}'")))?;
            if v == 0 || v > n {
                return Err(err(lineno, format!("vertex {v} out of range 1..={n}")));
            }
            if e.contains(&(v - 1)) {
                return Err(err(lineno, format!("vertex {v} repeated in edge")));
            }
            e.push(v - 1);
        }
        edges.push(e);
    }
    let Some((n, m, _, hline)) = header else {
        return Err(err(text.lines().count().max(1), "missing header line".into()));
    };
    if edges.len() != m {
        return Err(err(hline, format!("header declares {m} edges but {} were found", edges.len())));
    }
    HypergraphInstance::new(n, edges)
}

pub fn emit_hypergraph(h: &HypergraphInstance) -> String {
    let mut out = format!("h {} {} {}\n", h.num_vertices, h.edges.len(), h.k());
    for e in &h.edges {
        let ids: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(out, "{}", ids.join(" ")).unwrap();
    }
    out
}

/// One constraint per (edge, color): the edge may not be monochromatic in
/// that color. Constraints are ordered edge-major.
pub fn build_coloring(h: &HypergraphInstance, q: usize) -> Result<AtomicCsp> {
    if q < 2 {
        return Err(Error::InvalidInstance(format!("coloring needs at least 2 colors, got {q}")));
    }
    let mut constraints = Vec::with_capacity(h.edges.len() * q);
    for e in &h.edges {
        for color in 0..q as u32 {
            constraints.push(AtomicConstraint::new(e.clone(), vec![color; e.len()]));
        }
    }
    AtomicCsp::new(vec![VariableSpec::uniform(q); h.num_vertices], constraints)
}
