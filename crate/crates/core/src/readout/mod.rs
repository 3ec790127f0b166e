//! Linear readout on frozen reservoir features: ridge regression, metrics
//! and grid search.

mod grid;
mod metrics;
mod ridge;

pub use grid::{
    fit_pipeline, grid_search, log_grid, run_seed, stratified_folds, Candidate, CandidateScore, FittedPipeline,
    GridSearchConfig, GridSearchResult,
};
pub use metrics::{median, Metrics};
pub use ridge::{fit_ridge, Normalization, RidgeModel};
