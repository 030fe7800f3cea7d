//! In-process classifiers whose outputs are simple pixel statistics.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AdapterError, ModelAdapter, ModelMeta, ModelOutput};
use crate::mask_io::{BBox, ImageBuffer};

/// Wraps a per-image scoring closure and counts calls.
pub struct FnClassifier<F> {
    name: String,
    num_classes: usize,
    score: F,
    batches: AtomicUsize,
    images: AtomicUsize,
}

impl<F> FnClassifier<F>
where
    F: Fn(&ImageBuffer) -> Vec<f64> + Send + Sync,
{
    pub fn new(name: impl Into<String>, num_classes: usize, score: F) -> Self {
        FnClassifier {
            name: name.into(),
            num_classes,
            score,
            batches: AtomicUsize::new(0),
            images: AtomicUsize::new(0),
        }
    }

    /// `predict_batch` calls so far.
    pub fn batch_calls(&self) -> usize {
        self.batches.load(Ordering::SeqCst)
    }

    /// Images classified so far.
    pub fn image_calls(&self) -> usize {
        self.images.load(Ordering::SeqCst)
    }
}

impl<F> ModelAdapter for FnClassifier<F>
where
    F: Fn(&ImageBuffer) -> Vec<f64> + Send + Sync,
{
    fn predict_batch(&self, images: &[ImageBuffer]) -> Result<Vec<ModelOutput>, AdapterError> {
        if images.is_empty() {
            return Err(AdapterError::Protocol("empty batch".into()));
        }
        self.batches.fetch_add(1, Ordering::SeqCst);
        self.images.fetch_add(images.len(), Ordering::SeqCst);
        images
            .iter()
            .map(|img| ModelOutput::new((self.score)(img), 0.0))
            .collect()
    }

    fn meta(&self) -> Result<ModelMeta, AdapterError> {
        Ok(ModelMeta {
            num_classes: self.num_classes,
            input_size: None,
            model_name: self.name.clone(),
        })
    }
}

pub type BoxedScore = Box<dyn Fn(&ImageBuffer) -> Vec<f64> + Send + Sync>;
pub type MockClassifier = FnClassifier<BoxedScore>;

/// Same probability vector for every input.
pub fn constant(probs: Vec<f64>) -> MockClassifier {
    let n = probs.len();
    FnClassifier::new("constant", n, Box::new(move |_: &ImageBuffer| probs.clone()) as BoxedScore)
}

/// `1/C` for every class.
pub fn uniform(num_classes: usize) -> MockClassifier {
    constant(vec![1.0 / num_classes as f64; num_classes])
}

/// Mean channel intensity of pixel `k`.
pub fn luminance(image: &ImageBuffer, k: usize) -> f64 {
    let px = image.pixel(k);
    px.iter().map(|&v| f64::from(v)).sum::<f64>() / px.len() as f64
}

/// Brightness above mid-grey inside `region`, averaged over its pixels.
///
/// Each pixel contributes `max(0, lum - 128) / 127`, so the score is additive
/// over pixels and a region flattened to a mid-grey mean scores zero.
pub fn region_brightness_score(image: &ImageBuffer, region: BBox) -> f64 {
    let w = image.width() as usize;
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in region.min_row..=region.max_row.min(image.height() - 1) {
        for c in region.min_col..=region.max_col.min(image.width() - 1) {
            let k = r as usize * w + c as usize;
            sum += (luminance(image, k) - 128.0).max(0.0) / 127.0;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Two-class classifier with `p(class 1) = clamp(base + gain · score)`
/// where `score` is [`region_brightness_score`] over `region`.
pub fn region_brightness(region: BBox, base: f64, gain: f64) -> MockClassifier {
    FnClassifier::new(
        "region-brightness",
        2,
        Box::new(move |img: &ImageBuffer| {
            let p = (base + gain * region_brightness_score(img, region)).clamp(0.0, 1.0);
            vec![1.0 - p, p]
        }) as BoxedScore,
    )
}

/// FNV-1a over the image bytes and dimensions.
pub fn image_hash(image: &ImageBuffer) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let dims = [image.width(), image.height(), u32::from(image.channels())];
    for b in dims
        .iter()
        .flat_map(|d| d.to_le_bytes())
        .chain(image.pixels().iter().copied())
    {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Pseudo-random probabilities: a pure function of `(seed, image)`.
pub fn random_outputs(seed: u64, num_classes: usize) -> MockClassifier {
    FnClassifier::new(
        "random",
        num_classes,
        Box::new(move |img: &ImageBuffer| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ image_hash(img));
            let raw: Vec<f64> = (0..num_classes).map(|_| rng.random::<f64>() + 1e-6).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        }) as BoxedScore,
    )
}
