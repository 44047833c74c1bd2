use super::tree::{balanced_tree, TensorTree};
use crate::error::{Error, Result};
use crate::marking::RegimeCheck;
use serde::Serialize;

/// Per-vertex tree and marking rule for hypergraph coloring.
#[derive(Clone, Debug)]
pub struct ColoringTemplate {
    pub tree: TensorTree,
    /// Indexed by tree node id.
    pub marks: Vec<bool>,
    pub bounds: ColoringBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColoringBounds {
    pub depth: usize,
    /// Internal nodes at level ≥ `r` are marked.
    pub r: usize,
    /// ln of the certified bound α ≤ (4/Q^{1/3})^k.
    pub log_alpha_bound: f64,
    /// ln of the certified bound λ ≤ 4k²D²(8/Q^{2/3})^k.
    pub log_lambda_bound: f64,
}

/// ⌈log2 q⌉ and ⌊(2/3)·log2 q⌋, computed without rounding surprises at powers of two.
pub fn depth_and_r(q: usize) -> (usize, usize) {
    let depth = (usize::BITS - (q - 1).leading_zeros()) as usize;
    let lg = (q as f64).log2();
    let mut r = (2.0 * lg / 3.0).floor() as usize;
    // Guard the floor against log2 landing just below an exact value.
    while 2f64.powf(3.0 * (r as f64 + 1.0) / 2.0) <= q as f64 {
        r += 1;
    }
    (depth, r)
}

pub fn complete_binary_tensorize_with_marking(q: usize, k: usize) -> Result<ColoringTemplate> {
    if q < 2 {
        return Err(Error::InvalidInstance(format!("coloring needs at least 2 colors, got {q}")));
    }
    let tree = balanced_tree(q)?;
    let (depth, r) = depth_and_r(q);
    let mut marks = vec![false; tree.nodes().len()];
    for &z in tree.internal_nodes() {
        marks[z] = tree.level(z) >= r;
    }
    let (qf, kf) = (q as f64, k as f64);
    let bounds = ColoringBounds {
        depth,
        r,
        log_alpha_bound: kf * (4.0 / qf.cbrt()).ln(),
        log_lambda_bound: (4.0 * kf * kf * (depth * depth) as f64).ln() + kf * (8.0 / qf.powf(2.0 / 3.0)).ln(),
    };
    Ok(ColoringTemplate { tree, marks, bounds })
}

/// `Q ≥ 5` and `Δ(H) ≤ (Q^{1/3}/4)^k / (40·k·Q·log2 Q)`.
pub fn coloring_regime(q: usize, k: usize, delta_h: usize) -> RegimeCheck {
    let (qf, kf) = (q as f64, k as f64);
    let log_rhs = kf * (qf.cbrt() / 4.0).ln() - (40.0 * kf * qf * qf.log2()).ln();
    let log_lhs = (delta_h as f64).ln();
    RegimeCheck {
        inequality: "Q >= 5 and Delta(H) <= (Q^(1/3)/4)^k / (40 k Q log2 Q)".into(),
        gamma: f64::NAN,
        log_lhs,
        log_rhs,
        ok: q >= 5 && log_lhs <= log_rhs,
    }
}
