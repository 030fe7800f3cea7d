use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adapter::ModelAdapter;
use crate::lime::{explain, ExplainConfig, ExplainError, Explanation};
use crate::mask_io::{ImageBuffer, SegmentManifest};

use super::{
    compactness, contrastivity_checks, deletion_check, gini, incremental_deletion, noise_checks,
    preservation_check, randomization_check, repeated_stability, single_deletion_check,
};

/// Per-instance results. A field is `None` when its check did not run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub instance: String,
    pub preservation: Option<bool>,
    pub deletion: Option<bool>,
    pub single_deletion: Option<bool>,
    pub noise_preservation: Option<bool>,
    pub noise_deletion: Option<bool>,
    pub contrastive_preservation: Option<bool>,
    pub contrastive_deletion: Option<bool>,
    pub random_model_differs: Option<bool>,
    pub random_expl_differs: Option<bool>,
    pub incr_deletion_auc: Option<f64>,
    pub compactness: Option<f64>,
    pub gini: Option<f64>,
    pub rep_stability_mean_sigma: Option<f64>,
    pub config: Option<ExplainConfig>,
}

const BOOL_COLUMNS: [&str; 9] = [
    "preservation",
    "deletion",
    "single_deletion",
    "noise_preservation",
    "noise_deletion",
    "contrastive_preservation",
    "contrastive_deletion",
    "random_model_differs",
    "random_expl_differs",
];

const REAL_COLUMNS: [&str; 4] = [
    "incr_deletion_auc",
    "compactness",
    "gini",
    "rep_stability_mean_sigma",
];

impl MetricsReport {
    fn bools(&self) -> [Option<bool>; 9] {
        [
            self.preservation,
            self.deletion,
            self.single_deletion,
            self.noise_preservation,
            self.noise_deletion,
            self.contrastive_preservation,
            self.contrastive_deletion,
            self.random_model_differs,
            self.random_expl_differs,
        ]
    }

    fn reals(&self) -> [Option<f64>; 4] {
        [
            self.incr_deletion_auc,
            self.compactness,
            self.gini,
            self.rep_stability_mean_sigma,
        ]
    }

    /// Column names of [`MetricsReport::csv_record`].
    pub fn csv_header() -> Vec<&'static str> {
        std::iter::once("instance")
            .chain(BOOL_COLUMNS)
            .chain(REAL_COLUMNS)
            .collect()
    }

    /// Flat row; checks that did not run are empty strings.
    pub fn csv_record(&self) -> Vec<String> {
        let mut row = vec![self.instance.clone()];
        row.extend(self.bools().iter().map(|b| b.map(|v| v.to_string()).unwrap_or_default()));
        row.extend(self.reals().iter().map(|r| r.map(|v| v.to_string()).unwrap_or_default()));
        row
    }
}

/// Dataset-level scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub instances: usize,
    /// Percentage of instances where the check held, over those where it ran.
    pub percentages: BTreeMap<String, Option<f64>>,
    /// Mean over instances where the value was computed.
    pub means: BTreeMap<String, Option<f64>>,
}

pub fn aggregate(reports: &[MetricsReport]) -> DatasetSummary {
    let mut percentages = BTreeMap::new();
    for (c, name) in BOOL_COLUMNS.iter().enumerate() {
        let ran: Vec<bool> = reports.iter().filter_map(|r| r.bools()[c]).collect();
        let pct = (!ran.is_empty())
            .then(|| 100.0 * ran.iter().filter(|&&b| b).count() as f64 / ran.len() as f64);
        percentages.insert(name.to_string(), pct);
    }
    let mut means = BTreeMap::new();
    for (c, name) in REAL_COLUMNS.iter().enumerate() {
        let vals: Vec<f64> = reports.iter().filter_map(|r| r.reals()[c]).collect();
        let mean = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
        means.insert(name.to_string(), mean);
    }
    DatasetSummary {
        instances: reports.len(),
        percentages,
        means,
    }
}

/// What [`evaluate_instance`] runs. Checks needing a second model run only
/// when that model is supplied.
pub struct EvaluateOptions<'a> {
    pub config: ExplainConfig,
    pub background: Vec<u8>,
    /// `None` skips the noise checks.
    pub noise_stdev: Option<f64>,
    /// `None` skips repeated stability.
    pub stability_runs: Option<usize>,
    pub second_model: Option<&'a dyn ModelAdapter>,
    pub randomized_model: Option<&'a dyn ModelAdapter>,
    pub random_outputs_model: Option<&'a dyn ModelAdapter>,
}

impl EvaluateOptions<'_> {
    pub fn new(config: ExplainConfig) -> Self {
        EvaluateOptions {
            config,
            background: super::DEFAULT_BACKGROUND.to_vec(),
            noise_stdev: Some(super::DEFAULT_NOISE_STDEV),
            stability_runs: Some(super::DEFAULT_STABILITY_RUNS),
            second_model: None,
            randomized_model: None,
            random_outputs_model: None,
        }
    }
}

/// Explains one instance and runs the enabled checks in a fixed order.
pub fn evaluate_instance<A: ModelAdapter + ?Sized>(
    instance: &str,
    image: &ImageBuffer,
    manifest: &SegmentManifest,
    adapter: &A,
    options: &EvaluateOptions<'_>,
) -> Result<(Explanation, MetricsReport), ExplainError> {
    let config = &options.config;
    let explanation = explain(image, manifest, adapter, config)?;
    let mut report = MetricsReport {
        instance: instance.to_string(),
        config: Some(config.clone()),
        ..MetricsReport::default()
    };
    report.preservation = Some(preservation_check(image, &explanation, adapter)?);
    report.deletion = Some(deletion_check(image, &explanation, adapter)?);
    report.single_deletion = Some(single_deletion_check(
        image,
        &explanation,
        adapter,
        &options.background,
    )?);
    report.incr_deletion_auc = Some(incremental_deletion(image, &explanation, adapter)?);
    report.compactness = Some(compactness(&explanation));
    report.gini = Some(gini(&explanation.final_depth().fit.coefficients));
    if let Some(stdev) = options.noise_stdev {
        let (p, d) = noise_checks(image, manifest, config, adapter, stdev, config.seed)?;
        report.noise_preservation = Some(p);
        report.noise_deletion = Some(d);
    }
    if let Some(runs) = options.stability_runs {
        report.rep_stability_mean_sigma = Some(repeated_stability(image, &explanation, adapter, runs)?);
    }
    if let Some(f2) = options.second_model {
        let (p, d) = contrastivity_checks(image, &explanation, f2)?;
        report.contrastive_preservation = Some(p);
        report.contrastive_deletion = Some(d);
    }
    if let Some(m) = options.randomized_model {
        report.random_model_differs = Some(randomization_check(image, manifest, config, adapter, m)?);
    }
    if let Some(m) = options.random_outputs_model {
        report.random_expl_differs = Some(randomization_check(image, manifest, config, adapter, m)?);
    }
    Ok((explanation, report))
}
