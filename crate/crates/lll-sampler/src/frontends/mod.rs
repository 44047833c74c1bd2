//! Instance formats: DIMACS CNF, k-uniform hypergraphs, and a JSON
//! interchange format for general weighted atomic CSPs.

mod csp_json;
mod dimacs;
mod hypergraph;
mod naming;

pub use csp_json::{emit_csp, parse_csp, parse_csp_named};
pub use dimacs::{emit_dimacs, parse_dimacs, parse_dimacs_with_warnings, DimacsInstance};
pub use hypergraph::{build_coloring, emit_hypergraph, parse_hypergraph, HypergraphInstance};
pub use naming::Naming;
