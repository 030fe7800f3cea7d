use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rle::{decode_rle, encode_rle, Bitmap};
use super::MaskIoError;

/// Tight bounding box `(min_row, min_col, max_row, max_col)`, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub min_row: u32,
    pub min_col: u32,
    pub max_row: u32,
    pub max_col: u32,
}

/// One candidate mask of a manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMask {
    id: u64,
    rle: Vec<u64>,
    bitmap: Bitmap,
    pixel_count: u64,
    bbox: BBox,
}

impl SegmentMask {
    /// Builds a mask from a decoded bitmap; the bitmap must be non-empty.
    pub fn from_bitmap(id: u64, bitmap: Bitmap) -> Result<Self, MaskIoError> {
        let pixel_count = bitmap.count_ones();
        if pixel_count == 0 {
            return Err(MaskIoError::Schema(format!("segment {id} is empty")));
        }
        let w = bitmap.width() as usize;
        let mut bbox = BBox {
            min_row: u32::MAX,
            min_col: u32::MAX,
            max_row: 0,
            max_col: 0,
        };
        for k in bitmap.iter_ones() {
            let (r, c) = ((k / w) as u32, (k % w) as u32);
            bbox.min_row = bbox.min_row.min(r);
            bbox.min_col = bbox.min_col.min(c);
            bbox.max_row = bbox.max_row.max(r);
            bbox.max_col = bbox.max_col.max(c);
        }
        Ok(SegmentMask {
            id,
            rle: encode_rle(&bitmap),
            bitmap,
            pixel_count,
            bbox,
        })
    }

    /// Decodes `rle` over a `width × height` grid.
    pub fn from_rle(id: u64, rle: &[u64], width: u32, height: u32) -> Result<Self, MaskIoError> {
        let bitmap = decode_rle(rle, width, height).map_err(|e| match e {
            MaskIoError::LengthMismatch {
                expected, actual, ..
            } => MaskIoError::LengthMismatch {
                segment: Some(id),
                expected,
                actual,
            },
            other => other,
        })?;
        SegmentMask::from_bitmap(id, bitmap)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Canonical run list (re-encoded from the bitmap).
    pub fn rle(&self) -> &[u64] {
        &self.rle
    }

    pub fn bitmap(&self) -> &Bitmap {
        &self.bitmap
    }

    pub fn pixel_count(&self) -> u64 {
        self.pixel_count
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

/// Candidate masks produced by an external segmentation model.
///
/// Masks may overlap and may leave pixels uncovered. Segment order is kept
/// as loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentManifest {
    width: u32,
    height: u32,
    segments: Vec<SegmentMask>,
    provenance: Provenance,
    index: BTreeMap<u64, usize>,
}

impl SegmentManifest {
    pub fn new(
        width: u32,
        height: u32,
        segments: Vec<SegmentMask>,
        provenance: Provenance,
    ) -> Result<Self, MaskIoError> {
        if width == 0 || height == 0 {
            return Err(MaskIoError::Schema(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let mut index = BTreeMap::new();
        for (i, s) in segments.iter().enumerate() {
            if (s.bitmap.width(), s.bitmap.height()) != (width, height) {
                return Err(MaskIoError::Schema(format!(
                    "segment {} is {}x{}, manifest is {width}x{height}",
                    s.id,
                    s.bitmap.width(),
                    s.bitmap.height()
                )));
            }
            if index.insert(s.id, i).is_some() {
                return Err(MaskIoError::DuplicateId(s.id));
            }
        }
        Ok(SegmentManifest {
            width,
            height,
            segments,
            provenance,
            index,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn segments(&self) -> &[SegmentMask] {
        &self.segments
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn segment(&self, id: u64) -> Option<&SegmentMask> {
        self.index.get(&id).map(|&i| &self.segments[i])
    }

    /// Canonical compact JSON.
    pub fn to_json(&self) -> String {
        let raw = RawManifest {
            image: RawDims {
                width: self.width,
                height: self.height,
            },
            segments: self
                .segments
                .iter()
                .map(|s| RawSegment {
                    id: s.id,
                    rle: s.rle.clone(),
                })
                .collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string(&raw).expect("manifest serialization is infallible")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    image: RawDims,
    segments: Vec<RawSegment>,
    #[serde(default)]
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDims {
    width: u32,
    height: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    id: u64,
    rle: Vec<u64>,
}

/// Parses and validates manifest JSON.
pub fn parse_manifest(json: &str) -> Result<SegmentManifest, MaskIoError> {
    let raw: RawManifest =
        serde_json::from_str(json).map_err(|e| MaskIoError::Schema(e.to_string()))?;
    let (w, h) = (raw.image.width, raw.image.height);
    if w == 0 || h == 0 {
        return Err(MaskIoError::Schema(format!(
            "image dimensions must be positive, got {w}x{h}"
        )));
    }
    let segments = raw
        .segments
        .iter()
        .map(|s| SegmentMask::from_rle(s.id, &s.rle, w, h))
        .collect::<Result<Vec<_>, _>>()?;
    SegmentManifest::new(w, h, segments, raw.provenance)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<SegmentManifest, MaskIoError> {
    let path = path.as_ref();
    let json = fs::read_to_string(path).map_err(|e| MaskIoError::io(path, e))?;
    parse_manifest(&json)
}

pub fn save_manifest(manifest: &SegmentManifest, path: impl AsRef<Path>) -> Result<(), MaskIoError> {
    let path = path.as_ref();
    fs::write(path, manifest.to_json()).map_err(|e| MaskIoError::io(path, e))
}
