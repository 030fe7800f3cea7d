use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::adapter::{AdapterError, ModelAdapter, ModelOutput};
use crate::hierarchy::{
    build_hierarchy, fill_empty_space, filter_small_segments, segmentation_stats,
    select_depth_features, FeatureSpace, HierarchyError, SegmentationStats,
};
use crate::mask_io::{ImageBuffer, SegmentManifest};
use crate::scalar::Weight;

use super::{
    fit_surrogate, generate_samples_stream, kernel_weights, render_perturbation,
    select_significant, BinaryMatrix, FitError, SampleBatch, SurrogateFit,
};

fn default_depth() -> usize {
    1
}
fn default_top_k() -> usize {
    1
}
fn default_theta() -> u64 {
    crate::hierarchy::DEFAULT_MIN_SEGMENT_SIZE
}
fn default_t() -> f64 {
    crate::hierarchy::DEFAULT_OVERLAP_THRESHOLD
}
fn default_samples() -> usize {
    256
}
fn default_batch() -> usize {
    10
}
fn default_sigma() -> f64 {
    0.25
}
fn default_lambda() -> f64 {
    1.0
}
fn default_parallel() -> usize {
    1
}

/// Explanation hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainConfig {
    /// Number of refine-and-rescore iterations.
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// Features expanded into their children after each depth.
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Minimum segment size in pixels.
    #[serde(default = "default_theta")]
    pub theta: u64,
    /// Overlap ratio required for parenthood.
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    /// Kernel width.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Ridge strength.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
    /// Class to explain; the model's top class on the input when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_class: Option<usize>,
    /// Prediction batches in flight at once.
    #[serde(default = "default_parallel")]
    pub parallel_batches: usize,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            depth: default_depth(),
            top_k: default_top_k(),
            theta: default_theta(),
            t: default_t(),
            n_samples: default_samples(),
            batch_size: default_batch(),
            sigma: default_sigma(),
            lambda: default_lambda(),
            seed: 0,
            target_class: None,
            parallel_batches: default_parallel(),
        }
    }
}

impl ExplainConfig {
    pub fn validate(&self) -> Result<(), ExplainError> {
        let fail = |m: &str| Err(ExplainError::Config(m.to_string()));
        if self.depth == 0 {
            return fail("depth must be at least 1");
        }
        if self.top_k == 0 {
            return fail("top_k must be at least 1");
        }
        if !(self.t > 0.0 && self.t <= 1.0) {
            return fail("t must lie in (0, 1]");
        }
        if self.n_samples < 2 {
            return fail("n_samples must be at least 2");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return fail("sigma must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail("lambda must be finite and non-negative");
        }
        if self.parallel_batches == 0 {
            return fail("parallel_batches must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExplainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Segmentation(#[from] HierarchyError),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Surrogate fitted at one depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthResult {
    pub depth: usize,
    pub features: FeatureSpace,
    pub fit: SurrogateFit<f64>,
    /// Significant segment ids, largest coefficient first.
    pub selected: Vec<u64>,
    /// Parents replaced by their children to form this depth.
    pub expanded: Vec<u64>,
}

impl DepthResult {
    /// Feature indices of [`DepthResult::selected`].
    pub fn selected_indices(&self) -> Vec<usize> {
        self.selected
            .iter()
            .filter_map(|&id| self.features.index_of(id))
            .collect()
    }

    /// Coefficient of segment `id`, if it is a feature at this depth.
    pub fn coefficient(&self, id: u64) -> Option<f64> {
        self.features
            .index_of(id)
            .map(|i| self.fit.coefficients[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub config: ExplainConfig,
    pub target_class: usize,
    /// Model output on the unperturbed image.
    pub original_probs: Vec<f64>,
    /// Segment bookkeeping for depth 1.
    pub stats: SegmentationStats,
    /// Contiguous from depth 1.
    pub depths: Vec<DepthResult>,
}

impl Explanation {
    pub fn final_depth(&self) -> &DepthResult {
        self.depths.last().expect("an explanation has at least one depth")
    }
}

/// Renders every row of `z`, classifies in batches of `batch_size` with up to
/// `parallel` batches in flight, and returns outputs in row order.
pub fn predict_samples<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    features: &FeatureSpace,
    z: &BinaryMatrix,
    adapter: &A,
    batch_size: usize,
    parallel: usize,
) -> Result<Vec<ModelOutput>, AdapterError> {
    let rows: Vec<usize> = (0..z.rows()).collect();
    let batches: Vec<&[usize]> = rows.chunks(batch_size.max(1)).collect();
    let run = |batch: &[usize]| -> Result<Vec<ModelOutput>, AdapterError> {
        let images: Vec<ImageBuffer> = batch
            .iter()
            .map(|&i| render_perturbation(image, features, z.row(i)))
            .collect();
        let out = adapter.predict_batch(&images)?;
        if out.len() != images.len() {
            return Err(AdapterError::Protocol(format!(
                "sent {} images, received {} outputs",
                images.len(),
                out.len()
            )));
        }
        Ok(out)
    };

    let mut outputs = Vec::with_capacity(z.rows());
    if parallel <= 1 {
        for batch in batches {
            outputs.extend(run(batch)?);
        }
        return Ok(outputs);
    }
    for wave in batches.chunks(parallel) {
        let results: Vec<Result<Vec<ModelOutput>, AdapterError>> = std::thread::scope(|s| {
            let handles: Vec<_> = wave.iter().map(|b| s.spawn(|| run(b))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("prediction worker panicked"))
                .collect()
        });
        for r in results {
            outputs.extend(r?);
        }
    }
    Ok(outputs)
}

/// Samples, classifies and fits one surrogate over a fixed feature space.
///
/// Sampling uses ChaCha8 stream `stream` of `config.seed`. Returns the fit
/// and the model output on the unperturbed image (sample row 0). With no
/// `target_class` the top class of that output is explained.
pub fn fit_feature_space<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    features: &FeatureSpace,
    adapter: &A,
    config: &ExplainConfig,
    target_class: Option<usize>,
    stream: u64,
) -> Result<(SurrogateFit<f64>, ModelOutput), ExplainError> {
    let z = generate_samples_stream(features.len(), config.n_samples, config.seed, stream);
    let outputs = predict_samples(
        image,
        features,
        &z,
        adapter,
        config.batch_size,
        config.parallel_batches,
    )?;
    let original = outputs[0].clone();
    let target = target_class.unwrap_or_else(|| original.argmax_label());
    if target >= original.probs().len() {
        return Err(ExplainError::Config(format!(
            "target class {target} but the model has {} classes",
            original.probs().len()
        )));
    }
    let weights = kernel_weights(&z, config.sigma);
    let predictions = outputs.iter().map(|o| o.probs().to_vec()).collect();
    let batch = SampleBatch::new(z, weights, predictions, config.sigma)?;
    let fit = fit_surrogate(&batch, target, config.lambda)?;
    Ok((fit, original))
}

/// Runs the hierarchical explanation loop.
///
/// Filters masks by size, builds the hierarchy, then for each depth selects
/// features, fills empty space, fits a surrogate and expands the `top_k`
/// most positive features that have children. Stops early once nothing can
/// be expanded.
pub fn explain<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    manifest: &SegmentManifest,
    adapter: &A,
    config: &ExplainConfig,
) -> Result<Explanation, ExplainError> {
    config.validate()?;
    if (image.width(), image.height()) != (manifest.width(), manifest.height()) {
        return Err(HierarchyError::DimensionMismatch {
            image_w: image.width(),
            image_h: image.height(),
            mask_w: manifest.width(),
            mask_h: manifest.height(),
        }
        .into());
    }
    let kept = filter_small_segments(manifest, config.theta)?;
    let t = BigRational::from_threshold(config.t)
        .ok_or_else(|| ExplainError::Config(format!("t = {} is not representable", config.t)))?;
    let hierarchy = build_hierarchy(&kept, t)?;

    let mut history: Vec<Vec<u64>> = Vec::new();
    let mut depths: Vec<DepthResult> = Vec::new();
    let mut target_class = config.target_class;
    let mut original_probs = Vec::new();
    let mut stats = None;

    for depth in 1..=config.depth {
        let ids = match select_depth_features(&hierarchy, depth, &history) {
            Ok(ids) => ids,
            Err(HierarchyError::NothingToExpand { .. }) => {
                log::info!("stopping at depth {}: nothing left to expand", depth - 1);
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let features = fill_empty_space(&ids, manifest, image)?;
        if stats.is_none() {
            stats = Some(segmentation_stats(manifest, config.theta, &hierarchy, &features));
        }
        let (fit, original) =
            fit_feature_space(image, &features, adapter, config, target_class, depth as u64 - 1)?;
        if target_class.is_none() {
            target_class = Some(fit.target_class);
        }
        if original_probs.is_empty() {
            original_probs = original.probs().to_vec();
        }

        let selected = select_significant(&fit.coefficients)
            .into_iter()
            .map(|i| features.feature_ids()[i])
            .collect();

        let mut ranked: Vec<usize> = (0..features.len()).collect();
        ranked.sort_by(|&a, &b| {
            fit.coefficients[b]
                .partial_cmp(&fit.coefficients[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let to_expand: Vec<u64> = ranked
            .into_iter()
            .map(|i| features.feature_ids()[i])
            .filter(|&id| hierarchy.has_children(id))
            .take(config.top_k)
            .collect();

        let expanded = history.last().cloned().unwrap_or_default();
        let mut expanded: Vec<u64> = expanded
            .into_iter()
            .filter(|&id| hierarchy.has_children(id))
            .collect();
        expanded.sort_unstable();

        depths.push(DepthResult {
            depth,
            features,
            fit,
            selected,
            expanded,
        });
        history.push(to_expand);
    }

    Ok(Explanation {
        config: config.clone(),
        target_class: target_class.expect("depth 1 always runs"),
        original_probs,
        stats: stats.expect("depth 1 always runs"),
        depths,
    })
}
