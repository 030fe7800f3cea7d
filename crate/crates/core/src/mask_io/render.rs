use std::path::Path;

use super::image::{save_png, ImageBuffer};
use super::MaskIoError;
use crate::hierarchy::FeatureSpace;
use crate::lime::Explanation;

pub const POSITIVE_COLOR: [u8; 3] = [0, 0, 255];
pub const NEGATIVE_COLOR: [u8; 3] = [255, 0, 0];
pub const OUTLINE_COLOR: [u8; 3] = [255, 255, 0];

/// RGB attribution overlay.
///
/// Each feature is blended toward blue (positive) or red (negative) with
/// alpha `|c| / max|c|`. Pixels of selected features that touch another
/// feature (4-neighbourhood) are painted [`OUTLINE_COLOR`]. When every
/// coefficient is zero the image is returned unchanged.
pub fn render_overlay(
    image: &ImageBuffer,
    features: &FeatureSpace,
    coefficients: &[f64],
    selected: &[usize],
) -> ImageBuffer {
    assert_eq!(coefficients.len(), features.len(), "one coefficient per feature");
    let mut out = image.to_rgb();
    let max = coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 || !max.is_finite() {
        return out;
    }
    for k in 0..out.pixel_count() {
        let c = coefficients[features.label(k)];
        if c == 0.0 {
            continue;
        }
        let alpha = c.abs() / max;
        let tint = if c > 0.0 { POSITIVE_COLOR } else { NEGATIVE_COLOR };
        for (v, t) in out.pixel_mut(k).iter_mut().zip(tint) {
            let blended = f64::from(*v) * (1.0 - alpha) + f64::from(t) * alpha;
            *v = (blended + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
    }

    let (w, h) = (features.width() as usize, features.height() as usize);
    let mut is_selected = vec![false; features.len()];
    for &s in selected {
        is_selected[s] = true;
    }
    for k in 0..w * h {
        let f = features.label(k);
        if !is_selected[f] {
            continue;
        }
        let (r, c) = (k / w, k % w);
        let border = (r > 0 && features.label(k - w) != f)
            || (r + 1 < h && features.label(k + w) != f)
            || (c > 0 && features.label(k - 1) != f)
            || (c + 1 < w && features.label(k + 1) != f);
        if border {
            out.pixel_mut(k).copy_from_slice(&OUTLINE_COLOR);
        }
    }
    out
}

/// Writes the overlay of the deepest level of `explanation` as PNG.
pub fn render_attribution_map(
    explanation: &Explanation,
    image: &ImageBuffer,
    path: impl AsRef<Path>,
) -> Result<(), MaskIoError> {
    let last = explanation.final_depth();
    let overlay = render_overlay(
        image,
        &last.features,
        &last.fit.coefficients,
        &last.selected_indices(),
    );
    save_png(&overlay, path)
}
