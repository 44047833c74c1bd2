//! State tensorization: weighted decision trees over large domains.

mod coloring;
mod numeric;
mod tensorize;
mod tree;
mod uniform;

pub use coloring::{complete_binary_tensorize_with_marking, coloring_regime, depth_and_r, ColoringBounds, ColoringTemplate};
pub use numeric::{
    gamma_terms, round4, tilt_t1, tilt_t2, verify_numeric_facts, verify_numeric_facts_with, NumericCheck,
    NumericReport,
};
pub use tensorize::{tensorize, TensorizedCsp};
pub use tree::{balanced_tree, huffman_tensorize, Shape, TensorTree, TreeNode};
pub use uniform::{
    block_r, blocks_a, blocks_b, blocks_expected_x, construct_uniform, mean_x, mixture,
    uniform_construction_event, uniform_randomized_tensorization, x_of, UniformCase, UniformConstruction,
    UniformTree,
};
