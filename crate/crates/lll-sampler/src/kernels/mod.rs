//! Per-step machinery of the bounding chain.

pub mod component;
pub mod marginal;
pub mod rejection;
pub mod safe;
pub mod tape;
pub mod update;

pub use component::{component, component_with, ComponentResult, Scratch};
pub use marginal::{exact_component_marginal, ComponentMarginal, MarginalMethod, DEFAULT_TERM_BUDGET};
pub use rejection::{rejection_sampling, RejectionOutcome, DEFAULT_REJECTION_CAP};
pub use safe::{safe_pmf, SafePmf};
pub use update::{coupled_update, Kernel, StepInfo, StepKind};
