//! Perturbation sampling, proximity weighting, weighted ridge surrogates and
//! the depth-iterating explanation driver.

mod engine;
mod kernel;
mod ridge;
mod sampling;
mod selection;

pub use self::engine::{
    explain, fit_feature_space, predict_samples, DepthResult, ExplainConfig, ExplainError,
    Explanation,
};
pub use self::kernel::{kernel_weight, kernel_weights};
pub use self::ridge::{fit_surrogate, weighted_ridge, FitError, RidgeSolution, SampleBatch, SurrogateFit};
pub use self::sampling::{generate_samples, generate_samples_stream, render_perturbation, BinaryMatrix};
pub use self::selection::{select_significant, MAX_SELECTED, SELECTION_STD_FACTOR};
