use crate::adapter::ModelAdapter;
use crate::hierarchy::FeatureSpace;
use crate::lime::{fit_feature_space, ExplainConfig, ExplainError, Explanation};
use crate::mask_io::ImageBuffer;

/// Mean over features of the population standard deviation of each
/// coefficient across `runs` fits on a fixed feature space, using seeds
/// `config.seed + i`. One run gives zero.
pub fn coefficient_stability<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    features: &FeatureSpace,
    config: &ExplainConfig,
    target_class: Option<usize>,
    adapter: &A,
    runs: usize,
) -> Result<f64, ExplainError> {
    if runs == 0 {
        return Err(ExplainError::Config("stability needs at least one run".into()));
    }
    let mut target = target_class;
    let mut fits: Vec<Vec<f64>> = Vec::with_capacity(runs);
    for i in 0..runs {
        let cfg = ExplainConfig {
            seed: config.seed.wrapping_add(i as u64),
            ..config.clone()
        };
        let (fit, _) = fit_feature_space(image, features, adapter, &cfg, target, 0)?;
        target = Some(fit.target_class);
        fits.push(fit.coefficients);
    }
    let n = runs as f64;
    let m = features.len();
    let total: f64 = (0..m)
        .map(|j| {
            let mean = fits.iter().map(|c| c[j]).sum::<f64>() / n;
            let var = fits.iter().map(|c| (c[j] - mean).powi(2)).sum::<f64>() / n;
            var.sqrt()
        })
        .sum();
    Ok(total / m as f64)
}

/// [`coefficient_stability`] on the deepest feature space of `explanation`,
/// with its configuration and target class.
pub fn repeated_stability<A: ModelAdapter + ?Sized>(
    image: &ImageBuffer,
    explanation: &Explanation,
    adapter: &A,
    runs: usize,
) -> Result<f64, ExplainError> {
    coefficient_stability(
        image,
        &explanation.final_depth().features,
        &explanation.config,
        Some(explanation.target_class),
        adapter,
        runs,
    )
}
