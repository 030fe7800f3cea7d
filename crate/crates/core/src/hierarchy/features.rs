use std::collections::BTreeSet;

use crate::mask_io::{Bitmap, ImageBuffer, SegmentManifest, SegmentMask};
use crate::scalar::Weight;

use super::edt::squared_distance_transform;
use super::{HierarchyError, HierarchyGraph};

const UNASSIGNED: u32 = u32::MAX;

/// Segments with at least `min_size` pixels, in manifest order.
pub fn filter_small_segments(
    manifest: &SegmentManifest,
    min_size: u64,
) -> Result<Vec<&SegmentMask>, HierarchyError> {
    let kept: Vec<&SegmentMask> = manifest
        .segments()
        .iter()
        .filter(|s| s.pixel_count() >= min_size)
        .collect();
    if kept.is_empty() {
        return Err(HierarchyError::DegenerateSegmentation(format!(
            "none of {} segments has at least {min_size} pixels",
            manifest.segments().len()
        )));
    }
    Ok(kept)
}

/// Feature ids at `depth`.
///
/// `history[i]` holds the parents expanded after depth `i + 1`, so
/// `history.len()` must equal `depth - 1`. Each expansion replaces the
/// expanded parents that have children by those children; every other
/// feature carries over. Output is sorted by id.
pub fn select_depth_features<W: Weight>(
    hierarchy: &HierarchyGraph<W>,
    depth: usize,
    history: &[Vec<u64>],
) -> Result<Vec<u64>, HierarchyError> {
    if depth == 0 {
        return Err(HierarchyError::InvalidExpansion("depth starts at 1".into()));
    }
    if history.len() != depth - 1 {
        return Err(HierarchyError::InvalidExpansion(format!(
            "depth {depth} needs {} expansion sets, got {}",
            depth - 1,
            history.len()
        )));
    }
    let mut features: BTreeSet<u64> = hierarchy.root_children().iter().copied().collect();
    for (i, expanded) in history.iter().enumerate() {
        if let Some(missing) = expanded.iter().find(|id| !features.contains(id)) {
            return Err(HierarchyError::InvalidExpansion(format!(
                "segment {missing} is not a feature at depth {}",
                i + 1
            )));
        }
        let parents: Vec<u64> = expanded
            .iter()
            .copied()
            .filter(|&id| hierarchy.has_children(id))
            .collect();
        if parents.is_empty() {
            return Err(HierarchyError::NothingToExpand { depth: i + 2 });
        }
        for p in parents {
            features.remove(&p);
            features.extend(hierarchy.children(p));
        }
    }
    Ok(features.into_iter().collect())
}

/// Full partition of the image into explanation features, with per-feature
/// mean colours used as the "off" value during perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    width: u32,
    height: u32,
    channels: u8,
    feature_ids: Vec<u64>,
    label_map: Vec<u32>,
    pixel_counts: Vec<u64>,
    mean_color: Vec<f64>,
    unassigned_before_fill: u64,
}

impl FeatureSpace {
    /// Wraps a complete label map. Every label must be `< feature_ids.len()`
    /// and every feature must own a pixel.
    pub fn from_labels(
        feature_ids: Vec<u64>,
        label_map: Vec<u32>,
        image: &ImageBuffer,
    ) -> Result<Self, HierarchyError> {
        FeatureSpace::build(feature_ids, label_map, image, 0)
    }

    fn build(
        feature_ids: Vec<u64>,
        label_map: Vec<u32>,
        image: &ImageBuffer,
        unassigned_before_fill: u64,
    ) -> Result<Self, HierarchyError> {
        let n = feature_ids.len();
        if label_map.len() != image.pixel_count() {
            return Err(HierarchyError::InvalidLabels(format!(
                "{} labels for {} pixels",
                label_map.len(),
                image.pixel_count()
            )));
        }
        let channels = image.channels() as usize;
        let mut pixel_counts = vec![0u64; n];
        let mut sums = vec![0u64; n * channels];
        for (k, &label) in label_map.iter().enumerate() {
            let f = label as usize;
            if f >= n {
                return Err(HierarchyError::InvalidLabels(format!(
                    "pixel {k} has label {label} but there are {n} features"
                )));
            }
            pixel_counts[f] += 1;
            for (c, &v) in image.pixel(k).iter().enumerate() {
                sums[f * channels + c] += u64::from(v);
            }
        }
        if let Some(f) = pixel_counts.iter().position(|&c| c == 0) {
            return Err(HierarchyError::InvalidLabels(format!(
                "feature {} owns no pixels",
                feature_ids[f]
            )));
        }
        let mean_color = sums
            .iter()
            .enumerate()
            .map(|(i, &s)| s as f64 / pixel_counts[i / channels] as f64)
            .collect();
        Ok(FeatureSpace {
            width: image.width(),
            height: image.height(),
            channels: image.channels(),
            feature_ids,
            label_map,
            pixel_counts,
            mean_color,
            unassigned_before_fill,
        })
    }

    pub fn len(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature_ids.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    /// Segment ids, ascending; position is the feature index.
    pub fn feature_ids(&self) -> &[u64] {
        &self.feature_ids
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.feature_ids.binary_search(&id).ok()
    }

    /// Feature index of every pixel, row-major.
    pub fn label_map(&self) -> &[u32] {
        &self.label_map
    }

    #[inline]
    pub fn label(&self, pixel: usize) -> usize {
        self.label_map[pixel] as usize
    }

    pub fn pixel_count(&self, feature: usize) -> u64 {
        self.pixel_counts[feature]
    }

    /// Per-channel mean intensity of a feature region.
    pub fn mean_color(&self, feature: usize) -> &[f64] {
        let c = self.channels as usize;
        &self.mean_color[feature * c..(feature + 1) * c]
    }

    /// Mean colour rounded half-up to 8 bits.
    pub fn fill_color(&self, feature: usize) -> Vec<u8> {
        self.mean_color(feature)
            .iter()
            .map(|&m| (m + 0.5).floor().clamp(0.0, 255.0) as u8)
            .collect()
    }

    /// Pixels that no selected segment covered before nearest-segment fill.
    pub fn unassigned_before_fill(&self) -> u64 {
        self.unassigned_before_fill
    }

    pub fn empty_fraction(&self) -> f64 {
        self.unassigned_before_fill as f64 / self.label_map.len() as f64
    }

    /// Pixel mask of one feature.
    pub fn feature_mask(&self, feature: usize) -> Bitmap {
        let mut b = Bitmap::new(self.width, self.height);
        for (k, _) in self
            .label_map
            .iter()
            .enumerate()
            .filter(|(_, &l)| l as usize == feature)
        {
            b.set(k);
        }
        b
    }
}

/// Partitions the image among `ids`.
///
/// Overlapping masks give a pixel to the smaller segment (ties: lower id).
/// Segments left with no pixels are dropped. Uncovered pixels join the
/// segment owning their nearest covered pixel, measured between pixel
/// centres; ties go to the lowest id.
pub fn fill_empty_space(
    ids: &[u64],
    manifest: &SegmentManifest,
    image: &ImageBuffer,
) -> Result<FeatureSpace, HierarchyError> {
    if (image.width(), image.height()) != (manifest.width(), manifest.height()) {
        return Err(HierarchyError::DimensionMismatch {
            image_w: image.width(),
            image_h: image.height(),
            mask_w: manifest.width(),
            mask_h: manifest.height(),
        });
    }
    let ids: Vec<u64> = ids.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if ids.is_empty() {
        return Err(HierarchyError::DegenerateSegmentation(
            "no segments selected for the feature space".into(),
        ));
    }
    let segments = ids
        .iter()
        .map(|&id| manifest.segment(id).ok_or(HierarchyError::UnknownSegment(id)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut claim: Vec<usize> = (0..segments.len()).collect();
    claim.sort_by_key(|&i| (segments[i].pixel_count(), segments[i].id()));
    let mut owner = vec![UNASSIGNED; image.pixel_count()];
    for &i in &claim {
        for k in segments[i].bitmap().iter_ones() {
            if owner[k] == UNASSIGNED {
                owner[k] = i as u32;
            }
        }
    }

    let mut used = vec![false; segments.len()];
    for &o in owner.iter().filter(|&&o| o != UNASSIGNED) {
        used[o as usize] = true;
    }
    let mut remap = vec![UNASSIGNED; segments.len()];
    let mut feature_ids = Vec::new();
    for (i, &u) in used.iter().enumerate() {
        if u {
            remap[i] = feature_ids.len() as u32;
            feature_ids.push(ids[i]);
        }
    }
    for o in owner.iter_mut().filter(|o| **o != UNASSIGNED) {
        *o = remap[*o as usize];
    }

    let unassigned = owner.iter().filter(|&&o| o == UNASSIGNED).count() as u64;
    if unassigned > 0 {
        let mut best = vec![u64::MAX; owner.len()];
        let mut label = owner.clone();
        for f in 0..feature_ids.len() {
            let mut sites = Bitmap::new(image.width(), image.height());
            for (k, _) in owner.iter().enumerate().filter(|(_, &o)| o == f as u32) {
                sites.set(k);
            }
            let dist = squared_distance_transform(&sites);
            for (k, &o) in owner.iter().enumerate() {
                if o == UNASSIGNED && dist[k] < best[k] {
                    best[k] = dist[k];
                    label[k] = f as u32;
                }
            }
        }
        owner = label;
    }

    FeatureSpace::build(feature_ids, owner, image, unassigned)
}
