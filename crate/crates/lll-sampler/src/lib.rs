//! Perfect sampling of atomic constraint satisfaction problems.
//!
//! The sampler runs a bounding chain over partial assignments (values or the
//! wildcard `⋆`) with coupling from the past, then fills in the unmarked
//! variables by rejection sampling. Large domains are reduced to binary ones
//! by state tensorization.

pub mod csp;
pub mod error;
pub mod frontends;
pub mod kernels;
pub mod marking;
pub mod par;
pub mod pipeline;
pub mod sampler;
pub mod tensorization;
pub mod verify;

pub use csp::{AtomicConstraint, AtomicCsp, Measures, PartialAssignment, VariableSpec, STAR};
pub use error::{Error, Result};
pub use kernels::tape::{derive_seed, Label, Tape, TapeStream};
pub use marking::{Marking, MarkingConstants};
pub use sampler::{ChainRun, SampleRecord, Sampler, SamplerConfig};
