//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use hseg::adapter::mock::{self, MockClassifier};
use hseg::mask_io::{BBox, Bitmap, ImageBuffer, Provenance, SegmentManifest, SegmentMask};
use hseg::{BigRational, ExplainConfig};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rect_bitmap(w: u32, h: u32, r0: u32, c0: u32, r1: u32, c1: u32) -> Bitmap {
    let mut b = Bitmap::new(w, h);
    for r in r0..r1 {
        for c in c0..c1 {
            b.set((r * w + c) as usize);
        }
    }
    b
}

pub fn rect(id: u64, w: u32, h: u32, r0: u32, c0: u32, r1: u32, c1: u32) -> SegmentMask {
    SegmentMask::from_bitmap(id, rect_bitmap(w, h, r0, c0, r1, c1)).unwrap()
}

pub fn manifest(w: u32, h: u32, segments: Vec<SegmentMask>) -> SegmentManifest {
    SegmentManifest::new(w, h, segments, Provenance::default()).unwrap()
}

// ---------------------------------------------------------------- toy scene

pub const TOY: u32 = 64;
/// Keyed region, rows 8..32, cols 8..32.
pub const REGION: BBox = BBox {
    min_row: 8,
    min_col: 8,
    max_row: 31,
    max_col: 31,
};
pub const REGION_ID: u64 = 1;
/// Upper half of the region, checkerboard of 0 and 255.
pub const BRIGHT_CHILD: u64 = 10;
/// Lower half of the region, checkerboard of 0 and 200.
pub const DIM_CHILD: u64 = 11;

/// 64×64 RGB image: dark textured background, region checkerboards.
pub fn toy_image() -> ImageBuffer {
    let mut img = ImageBuffer::filled(TOY, TOY, &[0, 0, 0]).unwrap();
    for r in 0..TOY {
        for c in 0..TOY {
            let k = (r * TOY + c) as usize;
            let on = (r + c) % 2 == 0;
            let v = if (8..20).contains(&r) && (8..32).contains(&c) {
                if on { 255 } else { 0 }
            } else if (20..32).contains(&r) && (8..32).contains(&c) {
                if on { 200 } else { 0 }
            } else {
                ((r * 7 + c * 3) % 90) as u8
            };
            img.pixel_mut(k).copy_from_slice(&[v, v, v]);
        }
    }
    img
}

/// Region plus four background blocks tiling the rest of the image;
/// `with_children` adds the two halves of the region.
pub fn toy_manifest(with_children: bool) -> SegmentManifest {
    let mut segs = vec![
        rect(REGION_ID, TOY, TOY, 8, 8, 32, 32),
        rect(2, TOY, TOY, 0, 0, 8, 64),
        rect(3, TOY, TOY, 32, 0, 64, 64),
        rect(4, TOY, TOY, 8, 0, 32, 8),
        rect(5, TOY, TOY, 8, 32, 32, 64),
    ];
    if with_children {
        segs.push(rect(BRIGHT_CHILD, TOY, TOY, 8, 8, 20, 32));
        segs.push(rect(DIM_CHILD, TOY, TOY, 20, 8, 32, 32));
    }
    manifest(TOY, TOY, segs)
}

/// `p(class 1) = 0.2 + brightness of the region`.
pub fn toy_classifier() -> MockClassifier {
    mock::region_brightness(REGION, 0.2, 1.0)
}

/// Defaults except θ (toy segments are small) and σ: with the Hamming-count
/// kernel, σ = 0.25 leaves every perturbed sample with weight ≤ e⁻¹⁶, so the
/// ridge penalty swamps the signal.
pub fn toy_config() -> ExplainConfig {
    ExplainConfig {
        theta: 100,
        sigma: 1.0,
        seed: 7,
        ..ExplainConfig::default()
    }
}

// ------------------------------------------------------- random manifests

/// Up to `max_segments` masks on a `w`×`h` grid: rectangles, shrunken or
/// thinned copies of earlier masks, exact duplicates and unions, so that
/// containment, near-containment, mutual overlap and ties all occur.
pub fn random_manifest(rng: &mut ChaCha8Rng, w: u32, h: u32, max_segments: usize) -> SegmentManifest {
    let n = rng.random_range(1..=max_segments);
    let mut bitmaps: Vec<Bitmap> = Vec::new();
    while bitmaps.len() < n {
        let kind = if bitmaps.is_empty() { 0 } else { rng.random_range(0..5) };
        let b = match kind {
            0 => {
                let r0 = rng.random_range(0..h);
                let c0 = rng.random_range(0..w);
                let r1 = rng.random_range(r0 + 1..=h);
                let c1 = rng.random_range(c0 + 1..=w);
                rect_bitmap(w, h, r0, c0, r1, c1)
            }
            1 => {
                // random subset keeping each pixel with high probability
                let src = &bitmaps[rng.random_range(0..bitmaps.len())];
                let keep = rng.random_range(0.8..1.0);
                let mut b = Bitmap::new(w, h);
                for k in src.iter_ones() {
                    if rng.random_bool(keep) {
                        b.set(k);
                    }
                }
                b
            }
            2 => bitmaps[rng.random_range(0..bitmaps.len())].clone(),
            3 => {
                let a = &bitmaps[rng.random_range(0..bitmaps.len())];
                let c = &bitmaps[rng.random_range(0..bitmaps.len())];
                let mut b = a.clone();
                for k in c.iter_ones() {
                    b.set(k);
                }
                b
            }
            _ => {
                // grow an earlier mask by a few pixels
                let src = &bitmaps[rng.random_range(0..bitmaps.len())];
                let mut b = src.clone();
                for _ in 0..rng.random_range(1..6) {
                    b.set(rng.random_range(0..(w * h) as usize));
                }
                b
            }
        };
        if b.count_ones() > 0 {
            bitmaps.push(b);
        }
    }
    let mut ids: Vec<u64> = (0..50).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.random_range(0..=i));
    }
    let segs = bitmaps
        .into_iter()
        .zip(ids)
        .map(|(b, id)| SegmentMask::from_bitmap(id, b).unwrap())
        .collect();
    manifest(w, h, segs)
}

// --------------------------------------------------------- hierarchy oracle

fn pixels(s: &SegmentMask) -> Vec<bool> {
    s.bitmap().to_bools()
}

/// Parent of every segment (None = virtual root) following the rules
/// literally: edges for every ordered pair with overlap ≥ t, self-loops
/// dropped, mutual pairs kept only from the larger segment (equal size:
/// lower id), then for each node the best of all enumerated root paths
/// (heaviest, then longest, then lexicographically smallest ids).
pub fn oracle_parents(segments: &[&SegmentMask], t: &BigRational) -> BTreeMap<u64, Option<u64>> {
    let n = segments.len();
    let px: Vec<Vec<bool>> = segments.iter().map(|s| pixels(s)).collect();
    let size: Vec<u64> = px.iter().map(|p| p.iter().filter(|&&b| b).count() as u64).collect();
    let ids: Vec<u64> = segments.iter().map(|s| s.id()).collect();

    let mut m = vec![vec![None::<BigRational>; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let inter = px[i].iter().zip(&px[j]).filter(|(a, b)| **a && **b).count() as u64;
            let r = BigRational::new(BigInt::from(inter), BigInt::from(size[j]));
            if r >= *t && !r.is_zero() {
                m[i][j] = Some(r);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if m[i][j].is_some() && m[j][i].is_some() {
                let i_parent = size[i] > size[j] || (size[i] == size[j] && ids[i] < ids[j]);
                if i_parent {
                    m[j][i] = None;
                } else {
                    m[i][j] = None;
                }
            }
        }
    }

    // enumerate every path from a source node by DFS
    type Path = (BigRational, usize, Vec<u64>, Vec<usize>);
    let sources: Vec<usize> = (0..n).filter(|&j| (0..n).all(|i| m[i][j].is_none())).collect();
    let mut best: Vec<Option<Path>> = vec![None; n];
    let better = |a: &Path, b: &Path| {
        a.0 > b.0 || (a.0 == b.0 && (a.1 > b.1 || (a.1 == b.1 && a.2 < b.2)))
    };
    let mut stack: Vec<Path> = sources
        .iter()
        .map(|&s| (BigRational::zero(), 1, vec![ids[s]], vec![s]))
        .collect();
    while let Some(path) = stack.pop() {
        let last = *path.3.last().unwrap();
        if best[last].as_ref().is_none_or(|b| better(&path, b)) {
            best[last] = Some(path.clone());
        }
        for j in 0..n {
            if let Some(w) = &m[last][j] {
                let mut p = path.clone();
                p.0 += w.clone();
                p.1 += 1;
                p.2.push(ids[j]);
                p.3.push(j);
                stack.push(p);
            }
        }
    }
    (0..n)
        .map(|v| {
            let path = best[v].as_ref().expect("a DAG reaches every node from a source");
            let parent = (path.3.len() > 1).then(|| ids[path.3[path.3.len() - 2]]);
            (ids[v], parent)
        })
        .collect()
}

// -------------------------------------------------------------- fill oracle

/// Label per pixel as a segment id: smallest covering mask (ties lower id);
/// uncovered pixels take the owner of the nearest owned pixel by squared
/// Euclidean distance, ties to the lowest id.
pub fn oracle_fill(ids: &[u64], manifest: &SegmentManifest) -> Vec<u64> {
    let w = manifest.width() as i64;
    let total = (manifest.width() * manifest.height()) as usize;
    let mut owner: Vec<Option<u64>> = vec![None; total];
    for k in 0..total {
        let mut best: Option<(u64, u64)> = None;
        for &id in ids {
            let s = manifest.segment(id).unwrap();
            if s.bitmap().get(k) {
                let key = (s.pixel_count(), id);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        owner[k] = best.map(|b| b.1);
    }
    let owned: Vec<(i64, i64, u64)> = owner
        .iter()
        .enumerate()
        .filter_map(|(k, o)| o.map(|id| (k as i64 / w, k as i64 % w, id)))
        .collect();
    (0..total)
        .map(|k| {
            owner[k].unwrap_or_else(|| {
                let (r, c) = (k as i64 / w, k as i64 % w);
                owned
                    .iter()
                    .map(|&(pr, pc, id)| ((pr - r).pow(2) + (pc - c).pow(2), id))
                    .min()
                    .unwrap()
                    .1
            })
        })
        .collect()
}

// ------------------------------------------------------ hand-built results

/// Single-depth explanation with chosen coefficients and selection.
pub fn hand_explanation(
    features: hseg::FeatureSpace,
    coefficients: Vec<f64>,
    selected: Vec<u64>,
    original_probs: Vec<f64>,
) -> hseg::Explanation {
    let target = hseg::adapter::argmax(&original_probs);
    let stats = hseg::hierarchy::SegmentationStats {
        initial_segments: features.len(),
        after_filter: features.len(),
        top_level: features.len(),
        final_features: features.len(),
        empty_fraction: 0.0,
    };
    hseg::Explanation {
        config: ExplainConfig::default(),
        target_class: target,
        original_probs,
        stats,
        depths: vec![hseg::lime::DepthResult {
            depth: 1,
            features,
            fit: hseg::Fit {
                coefficients,
                intercept: 0.0,
                sigma: 0.25,
                lambda: 1.0,
                target_class: target,
                weighted_loss: 0.0,
            },
            selected,
            expanded: Vec::new(),
        }],
    }
}
