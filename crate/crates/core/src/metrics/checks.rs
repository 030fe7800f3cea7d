use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::adapter::{AdapterError, ModelAdapter, ModelOutput};
use crate::lime::{explain, render_perturbation, DepthResult, ExplainConfig, ExplainError, Explanation};
use crate::mask_io::{ImageBuffer, SegmentManifest};

pub(crate) fn predict_one<A: ModelAdapter + ?Sized>(
    adapter: &A,
    image: ImageBuffer,
) -> Result<ModelOutput, AdapterError> {
    adapter
        .predict_batch(std::slice::from_ref(&image))?
        .into_iter()
        .next()
        .ok_or_else(|| AdapterError::Protocol("empty response for a single image".into()))
}

pub(crate) fn original_class(explanation: &Explanation) -> usize {
    crate::adapter::argmax(&explanation.original_probs)
}

/// States with selected features set to `keep_selected` and the rest to its negation.
fn selection_states(depth: &DepthResult, keep_selected: bool) -> Vec<u8> {
    let mut states = vec![u8::from(!keep_selected); depth.features.len()];
    for i in depth.selected_indices() {
        states[i] = u8::from(keep_selected);
    }
    states
}

pub(crate) fn preserved_image(image: &ImageBuffer, explanation: &Explanation) -> ImageBuffer {
    let last = explanation.final_depth();
    render_perturbation(image, &last.features, &selection_states(last, true))
}

fn deleted_image(image: &ImageBuffer, explanation: &Explanation) -> ImageBuffer {
    let last = explanation.final_depth();
    render_perturbation(image, &last.features, &selection_states(last, false))
}

/// Keeps only the selected features (the rest mean-filled) and reports
/// whether the top class is unchanged.
pub fn preservation_check<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    explanation: &Explanation,
    adapter: &A,
) -> Result<bool, AdapterError> {
    let out = predict_one(adapter, preserved_image(image, explanation))?;
    Ok(out.argmax_label() == original_class(explanation))
}

/// Mean-fills the selected features and reports whether the top class
/// changes. A change counts as success.
pub fn deletion_check<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    explanation: &Explanation,
    adapter: &A,
) -> Result<bool, AdapterError> {
    let out = predict_one(adapter, deleted_image(image, explanation))?;
    Ok(out.argmax_label() != original_class(explanation))
}

/// Paints every non-selected feature with `background` and reports whether
/// the top class is unchanged. `background` has one value per channel, or
/// one value broadcast to all channels.
pub fn single_deletion_check<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    explanation: &Explanation,
    adapter: &A,
    background: &[u8],
) -> Result<bool, ExplainError> {
    let channels = image.channels() as usize;
    let color: Vec<u8> = match background.len() {
        1 => vec![background[0]; channels],
        n if n == channels => background.to_vec(),
        // An RGB background on a grayscale image uses its first channel.
        3 if channels == 1 => vec![background[0]],
        n => {
            return Err(ExplainError::Config(format!(
                "background has {n} channels, image has {channels}"
            )))
        }
    };
    let last = explanation.final_depth();
    let keep = selection_states(last, true);
    let mut masked = image.clone();
    for k in 0..masked.pixel_count() {
        if keep[last.features.label(k)] == 0 {
            masked.pixel_mut(k).copy_from_slice(&color);
        }
    }
    let out = predict_one(adapter, masked)?;
    Ok(out.argmax_label() == original_class(explanation))
}

/// Fraction of pixels covered by the selected features.
pub fn compactness(explanation: &Explanation) -> f64 {
    let last = explanation.final_depth();
    let covered: u64 = last
        .selected_indices()
        .into_iter()
        .map(|i| last.features.pixel_count(i))
        .sum();
    let total = u64::from(last.features.width()) * u64::from(last.features.height());
    covered as f64 / total as f64
}

/// Adds i.i.d. Gaussian noise per channel value, rounded and clamped to
/// `0..=255`. Zero `stdev` returns the image unchanged.
pub fn add_gaussian_noise(image: &ImageBuffer, stdev: f64, seed: u64) -> Result<ImageBuffer, ExplainError> {
    if !(stdev >= 0.0 && stdev.is_finite()) {
        return Err(ExplainError::Config(format!("noise stdev must be finite and ≥ 0, got {stdev}")));
    }
    let normal = Normal::new(0.0, stdev)
        .map_err(|e| ExplainError::Config(format!("noise stdev {stdev}: {e}")))?;
    let mut out = image.clone();
    if stdev == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in out.pixels_mut() {
        let noisy = f64::from(*v) + rng.sample(normal);
        *v = noisy.round().clamp(0.0, 255.0) as u8;
    }
    Ok(out)
}

/// Explains a noisy copy of `image` and runs the preservation and deletion
/// checks on that explanation.
pub fn noise_checks<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    manifest: &SegmentManifest,
    config: &ExplainConfig,
    adapter: &A,
    noise_stdev: f64,
    seed: u64,
) -> Result<(bool, bool), ExplainError> {
    let noisy = add_gaussian_noise(image, noise_stdev, seed)?;
    let explanation = explain(&noisy, manifest, adapter, config)?;
    Ok((
        preservation_check(&noisy, &explanation, adapter)?,
        deletion_check(&noisy, &explanation, adapter)?,
    ))
}

/// Preservation and deletion judged by a second model `f2` against the
/// top class of the model that produced `explanation`.
pub fn contrastivity_checks<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    explanation: &Explanation,
    f2: &A,
) -> Result<(bool, bool), AdapterError> {
    let classes = f2.meta()?.num_classes;
    if classes != explanation.original_probs.len() {
        return Err(AdapterError::Validation(format!(
            "label spaces differ: explained model has {} classes, second model {classes}",
            explanation.original_probs.len()
        )));
    }
    Ok((
        preservation_check(image, explanation, f2)?,
        deletion_check(image, explanation, f2)?,
    ))
}

/// Explains `image` under `altered` (randomized weights or random outputs),
/// shows the kept-only image to `normal` and reports whether its top class
/// differs from `normal` on the original image.
pub fn randomization_check<A, B>(
    image: &ImageBuffer,
    manifest: &SegmentManifest,
    config: &ExplainConfig,
    normal: &A,
    altered: &B,
) -> Result<bool, ExplainError>
where
    A: ModelAdapter + ?Sized,
    B: ModelAdapter + ?Sized,
{
    let reference = predict_one(normal, image.clone())?.argmax_label();
    let explanation = explain(image, manifest, altered, config)?;
    let out = predict_one(normal, preserved_image(image, &explanation))?;
    Ok(out.argmax_label() != reference)
}
