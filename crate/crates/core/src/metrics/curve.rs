use crate::adapter::ModelAdapter;
use crate::lime::{render_perturbation, ExplainError, Explanation};
use crate::mask_io::ImageBuffer;
use crate::scalar::Real;

/// Trapezoid area under `ys` sampled at evenly spaced points of `[0, 1]`.
///
/// Fewer than two points span no interval; a single point yields its value.
pub fn trapezoid_auc<T: Real>(ys: &[T]) -> T {
    match ys.len() {
        0 => T::zero(),
        1 => ys[0],
        n => {
            let h = T::one() / T::from_count(n - 1);
            let half = T::lit(0.5);
            ys.windows(2).map(|w| (w[0] + w[1]) * half * h).sum()
        }
    }
}

/// Target-class confidence as features are removed, most important first.
#[derive(Debug, Clone, PartialEq)]
pub struct DeletionCurve {
    /// Removal order as feature indices.
    pub order: Vec<usize>,
    /// Confidence before any removal, then after each step taken.
    pub confidences: Vec<f64>,
    /// Step at which the top class changed (1-based), if it did.
    pub flipped_at: Option<usize>,
}

impl DeletionCurve {
    pub fn auc(&self) -> f64 {
        trapezoid_auc(&self.confidences)
    }
}

/// Removes features cumulatively in descending coefficient order (ties by
/// lower index), mean-filling each, until the top class changes or every
/// feature is gone. Steps are sent in batches of the explanation's batch size.
pub fn deletion_curve<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    explanation: &Explanation,
    adapter: &A,
) -> Result<DeletionCurve, ExplainError> {
    let last = explanation.final_depth();
    let coefs = &last.fit.coefficients;
    let n = coefs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| coefs[b].total_cmp(&coefs[a]).then(a.cmp(&b)));

    let target = explanation.target_class;
    let reference = super::checks::original_class(explanation);
    let mut confidences = vec![explanation.original_probs[target]];
    let mut states = vec![1u8; n];
    let mut flipped_at = None;
    let step_images: Vec<ImageBuffer> = order
        .iter()
        .map(|&f| {
            states[f] = 0;
            render_perturbation(image, &last.features, &states)
        })
        .collect();

    'outer: for (b, chunk) in step_images.chunks(explanation.config.batch_size.max(1)).enumerate() {
        let outputs = adapter.predict_batch(chunk)?;
        for (i, out) in outputs.iter().enumerate() {
            confidences.push(out.prob(target));
            if out.argmax_label() != reference {
                flipped_at = Some(b * explanation.config.batch_size.max(1) + i + 1);
                break 'outer;
            }
        }
    }
    Ok(DeletionCurve {
        order,
        confidences,
        flipped_at,
    })
}

/// Area under [`deletion_curve`] over the traversed prefix.
pub fn incremental_deletion<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    explanation: &Explanation,
    adapter: &A,
) -> Result<f64, ExplainError> {
    Ok(deletion_curve(image, explanation, adapter)?.auc())
}
