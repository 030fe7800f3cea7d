//! Images, row-major RLE masks, segment manifests, explanation documents and
//! attribution overlays.

mod explanation;
mod image;
mod manifest;
mod render;
mod rle;

use std::path::PathBuf;

pub use self::explanation::{
    write_explanation, DepthEntry, ExplanationDocument, FeatureEntry, FitEntry,
};
pub use self::image::{load_image, save_png, ImageBuffer};
pub use self::manifest::{
    load_manifest, parse_manifest, save_manifest, BBox, Provenance, SegmentManifest, SegmentMask,
};
pub use self::render::{
    render_attribution_map, render_overlay, OUTLINE_COLOR, NEGATIVE_COLOR, POSITIVE_COLOR,
};
pub use self::rle::{decode_rle, encode_rle, Bitmap};

#[derive(Debug, thiserror::Error)]
pub enum MaskIoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported raster format: {0}")]
    Format(String),
    #[error("manifest schema error: {0}")]
    Schema(String),
    #[error("run lengths of {} sum to {actual}, expected {expected}", segment_label(.segment))]
    LengthMismatch {
        segment: Option<u64>,
        expected: u64,
        actual: u64,
    },
    #[error("duplicate segment id {0}")]
    DuplicateId(u64),
    #[error("invalid image buffer: {0}")]
    InvalidImage(String),
}

fn segment_label(segment: &Option<u64>) -> String {
    match segment {
        Some(id) => format!("segment {id}"),
        None => "mask".to_string(),
    }
}

impl MaskIoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MaskIoError::Io {
            path: path.into(),
            source,
        }
    }
}
