//! Aligning feature representations of stimuli with similarity judgments.
//!
//! The central model predicts the similarity of items `i` and `j` as a
//! weighted inner product of their feature vectors, `S = F W Fᵀ` with `W`
//! diagonal. [`ridge::fit_pipeline`] estimates `W` from an observed
//! similarity matrix by cross-validated ridge regression on the upper
//! triangle. The remaining modules provide randomized controls
//! ([`baselines`]), spatial and hierarchical representation recovery
//! ([`repr`]), and the reweighted-classification experiment
//! ([`reclassify`]).
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default) and the caller selects [`Execution::Parallel`]. Results do
//! not depend on the execution policy.

pub mod baselines;
pub mod datamodel;
pub mod error;
pub mod exec;
mod linalg;
pub mod reclassify;
pub mod repr;
pub mod ridge;
pub mod rng;
pub mod simcore;
pub mod synthetic;

pub use datamodel::{
    validate_alignment, FeatureMatrix, PairIndex, SimilarityMatrix, WeightVector,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use ridge::{fit_pipeline, FitReport, PipelineConfig};
pub use simcore::{
    build_design_matrix, extract_targets, gram_similarity, predict_similarity, r_squared,
    DesignMatrix, TargetVector,
};
