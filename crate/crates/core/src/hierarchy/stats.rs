use serde::{Deserialize, Serialize};

use crate::mask_io::SegmentManifest;
use crate::scalar::Weight;

use super::{FeatureSpace, HierarchyGraph};

/// Segment counts through the pipeline stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationStats {
    /// Masks in the manifest.
    pub initial_segments: usize,
    /// Masks surviving the minimum-size filter.
    pub after_filter: usize,
    /// Top-level nodes of the hierarchy.
    pub top_level: usize,
    /// Features in the filled feature space.
    pub final_features: usize,
    /// Uncovered pixel share before nearest-segment fill.
    pub empty_fraction: f64,
}

pub fn segmentation_stats<W: Weight>(
    manifest: &SegmentManifest,
    min_size: u64,
    hierarchy: &HierarchyGraph<W>,
    features: &FeatureSpace,
) -> SegmentationStats {
    SegmentationStats {
        initial_segments: manifest.segments().len(),
        after_filter: manifest
            .segments()
            .iter()
            .filter(|s| s.pixel_count() >= min_size)
            .count(),
        top_level: hierarchy.root_children().len(),
        final_features: features.len(),
        empty_fraction: features.empty_fraction(),
    }
}
