//! Quantitative checks over finished explanations.
//!
//! Every check works on the deepest level of an [`Explanation`](crate::lime::Explanation):
//! its feature space, selected features and coefficients.

mod checks;
mod curve;
mod gini;
mod report;
mod stability;

pub use self::checks::{
    add_gaussian_noise, compactness, contrastivity_checks, deletion_check, noise_checks,
    preservation_check, randomization_check, single_deletion_check,
};
pub use self::curve::{deletion_curve, incremental_deletion, trapezoid_auc, DeletionCurve};
pub use self::gini::gini;
pub use self::report::{aggregate, evaluate_instance, DatasetSummary, EvaluateOptions, MetricsReport};
pub use self::stability::{coefficient_stability, repeated_stability};

/// Gaussian noise standard deviation on the 0-255 scale.
pub const DEFAULT_NOISE_STDEV: f64 = 10.0;

/// Runs per instance for [`repeated_stability`].
pub const DEFAULT_STABILITY_RUNS: usize = 16;

/// Single-deletion background.
pub const DEFAULT_BACKGROUND: [u8; 3] = [0, 0, 0];
