//! Random CDE/RDE reservoirs: R-CDE, RF-CDE and R-RDE feature extractors.

mod engine;
mod extract;
mod features;
mod spec;
mod state;

pub use extract::{rcde_extract, rfcde_extract, rrde_extract, window_bounds, window_log_signatures};
pub use features::{extract_batch, FeatureMatrix};
pub use spec::{Activation, CommutatorMode, ReservoirSpec, Variant};
pub use state::ReservoirState;

pub(crate) use engine::{Engine, Operator};
pub(crate) use state::draw_gaussian;
