//! Hierarchical segment-based local surrogate explanations for image
//! classifiers.
//!
//! Externally produced segmentation masks are filtered by size, arranged into
//! a containment hierarchy, and used as interpretable features for a weighted
//! linear surrogate fitted to a black-box classifier. Features judged
//! important can be refined into their child segments and rescored.
//!
//! Numeric code is generic: fitting and metrics over [`scalar::Real`]
//! (`f32`, `f64`), hierarchy weights over [`scalar::Weight`], which also
//! admits exact rationals. The aliases below fix the types used by the
//! explanation pipeline.

pub mod adapter;
pub mod hierarchy;
pub mod lime;
pub mod mask_io;
pub mod metrics;
pub mod scalar;

pub use num_rational::BigRational;

/// Hierarchy with exact rational path weights, as built by [`lime::explain`].
pub type ExactHierarchy = hierarchy::HierarchyGraph<BigRational>;
/// Hierarchy with double precision weights.
pub type Hierarchy = hierarchy::HierarchyGraph<f64>;
pub type Fit = lime::SurrogateFit<f64>;
pub type Ridge = lime::RidgeSolution<f64>;
pub type Samples = lime::SampleBatch<f64>;

pub use adapter::{connect, AdapterError, ConnectOptions, ModelAdapter, ModelMeta, ModelOutput};
pub use hierarchy::{FeatureSpace, HierarchyError};
pub use lime::{explain, ExplainConfig, ExplainError, Explanation};
pub use mask_io::{ImageBuffer, MaskIoError, SegmentManifest};
