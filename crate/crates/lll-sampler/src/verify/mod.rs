//! Exact laws by enumeration, distance and goodness-of-fit statistics, and
//! empirical checks of the sampler's guarantees.

mod certify;
mod coalescence;
mod invariant;
mod law;
mod stats;
mod suite;

pub use certify::{certify, certify_sampler, tv_threshold, CertifyReport};
pub use coalescence::{coalescence_bound, coalescence_experiment, CoalescenceRow, CoalescenceTable};
pub use invariant::{check_bounding_invariant, InvariantReport, ScanRule};
pub use law::{enumerate_law, enumerate_law_with, ExactLaw, DEFAULT_STATE_BUDGET};
pub use stats::{chi_square, tv_distance, tv_distance_keyed, ChiSquare, CHI_SQUARE_ALPHA, MIN_EXPECTED};
pub use suite::{property_suite, random_instance, PropertyResult, SuiteReport};
