//! Compositional segment hierarchy and depth-specific feature spaces.

mod edt;
mod features;
mod graph;
mod stats;

pub use self::edt::squared_distance_transform;
pub use self::features::{
    fill_empty_space, filter_small_segments, select_depth_features, FeatureSpace,
};
pub use self::graph::{build_hierarchy, overlap_matrix, overlap_metric, HierarchyEdge, HierarchyGraph};
pub use self::stats::{segmentation_stats, SegmentationStats};

/// Default parenthood threshold on the overlap ratio.
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.9;
/// Default minimum segment size in pixels.
pub const DEFAULT_MIN_SEGMENT_SIZE: u64 = 500;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HierarchyError {
    #[error("degenerate segmentation: {0}")]
    DegenerateSegmentation(String),
    #[error("nothing to expand at depth {depth}: no expanded parent has children")]
    NothingToExpand { depth: usize },
    #[error("invalid expansion: {0}")]
    InvalidExpansion(String),
    #[error("overlap threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("segment {0} is not in the manifest")]
    UnknownSegment(u64),
    #[error("image is {image_w}x{image_h} but masks are {mask_w}x{mask_h}")]
    DimensionMismatch {
        image_w: u32,
        image_h: u32,
        mask_w: u32,
        mask_h: u32,
    },
    #[error("invalid label map: {0}")]
    InvalidLabels(String),
}
