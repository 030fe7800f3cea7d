use std::fs;
use std::path::{Path, PathBuf};

use hseg::hierarchy::{
    build_hierarchy, fill_empty_space, filter_small_segments, segmentation_stats,
    select_depth_features, SegmentationStats,
};
use hseg::mask_io::{
    load_image, load_manifest, render_attribution_map, render_overlay, save_png, write_explanation,
    ExplanationDocument,
};
use hseg::metrics::{aggregate, evaluate_instance, EvaluateOptions, MetricsReport};
use hseg::scalar::Weight;
use hseg::{connect, BigRational, ImageBuffer, ModelAdapter, SegmentManifest};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::dataset::{load_dataset, Instance};
use crate::error::CliError;

pub const EXPLANATION_FILE: &str = "explanation.json";
pub const ATTRIBUTION_FILE: &str = "attribution.png";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SWEEP_CSV: &str = "theta_sweep.csv";
pub const SWEEP_JSON: &str = "theta_sweep.json";

fn create_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

fn load_inputs(image: &Path, masks: &Path) -> Result<(ImageBuffer, SegmentManifest), CliError> {
    Ok((load_image(image)?, load_manifest(masks)?))
}

pub fn explain(run: &RunConfig) -> Result<(), CliError> {
    let image_path = RunConfig::require(&run.image, "image")?;
    let masks_path = RunConfig::require(&run.masks, "masks")?;
    let out = RunConfig::require(&run.out, "out")?;
    let config = run.explain_config()?;
    let options = run.connect_options()?;
    let endpoint = run.endpoint()?;

    let (image, manifest) = load_inputs(image_path, masks_path)?;
    let adapter = connect(&endpoint, &options)?;
    let explanation = hseg::explain(&image, &manifest, &adapter, &config)?;
    for d in &explanation.depths {
        log::info!("depth {}: {} features, selected {:?}", d.depth, d.features.len(), d.selected);
    }

    create_out_dir(out)?;
    let doc = ExplanationDocument::new(&explanation, &image_path.display().to_string(), None);
    write_explanation(&doc, out.join(EXPLANATION_FILE))?;
    render_attribution_map(&explanation, &image, out.join(ATTRIBUTION_FILE))?;
    Ok(())
}

/// Re-renders the attribution map of a saved explanation. The feature space
/// is rebuilt from the deepest level's segment ids.
pub fn render(run: &RunConfig, explanation: &Path) -> Result<(), CliError> {
    let image_path = RunConfig::require(&run.image, "image")?;
    let masks_path = RunConfig::require(&run.masks, "masks")?;
    let out = RunConfig::require(&run.out, "out")?;
    let doc = ExplanationDocument::load(explanation)?;
    let (image, manifest) = load_inputs(image_path, masks_path)?;

    let last = doc
        .depths
        .last()
        .ok_or_else(|| CliError::Config("explanation has no depths".into()))?;
    let ids: Vec<u64> = last.features.iter().map(|f| f.id).collect();
    let features = fill_empty_space(&ids, &manifest, &image)?;
    if features.feature_ids() != ids.as_slice() {
        return Err(CliError::Config(format!(
            "masks do not reproduce the explanation's features {ids:?}"
        )));
    }
    let coefficients: Vec<f64> = last.features.iter().map(|f| f.coefficient).collect();
    let selected: Vec<usize> = last
        .selected
        .iter()
        .filter_map(|&id| features.index_of(id))
        .collect();
    let overlay = render_overlay(&image, &features, &coefficients, &selected);
    create_out_dir(out)?;
    save_png(&overlay, out.join(ATTRIBUTION_FILE))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Failure {
    instance: String,
    error: String,
}

#[derive(Debug, Serialize)]
struct Summary {
    #[serde(flatten)]
    summary: hseg::metrics::DatasetSummary,
    failures: Vec<Failure>,
    config: hseg::ExplainConfig,
}

struct Loaded {
    instance: Instance,
    image: ImageBuffer,
    manifest: SegmentManifest,
}

pub fn evaluate(run: &RunConfig) -> Result<(), CliError> {
    let dataset = RunConfig::require(&run.dataset, "dataset")?;
    let out = RunConfig::require(&run.out, "out")?;
    if run.seed.is_none() {
        return Err(CliError::Config("evaluate requires an explicit seed".into()));
    }
    let config = run.explain_config()?;
    let connect_opts = run.connect_options()?;
    let endpoint = run.endpoint()?;
    let jobs = run.jobs.unwrap_or(1);
    if jobs == 0 {
        return Err(CliError::Config("jobs must be at least 1".into()));
    }
    let noise_stdev = run.noise_stdev.unwrap_or(hseg::metrics::DEFAULT_NOISE_STDEV);
    if !(noise_stdev >= 0.0 && noise_stdev.is_finite()) {
        return Err(CliError::Config(format!("noise_stdev must be ≥ 0, got {noise_stdev}")));
    }
    let stability_runs = run.stability_runs.unwrap_or(hseg::metrics::DEFAULT_STABILITY_RUNS);
    if stability_runs == 0 {
        return Err(CliError::Config("stability_runs must be at least 1".into()));
    }

    let instances = load_dataset(dataset)?;
    let loaded = instances
        .into_iter()
        .map(|instance| {
            let (image, manifest) = load_inputs(&instance.image, &instance.masks)?;
            Ok(Loaded {
                instance,
                image,
                manifest,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let adapter = connect(&endpoint, &connect_opts)?;
    let optional = |e: &Option<String>| e.as_deref().map(|e| connect(e, &connect_opts)).transpose();
    let second = optional(&run.endpoint2)?;
    let randomized = optional(&run.rand_endpoint)?;
    let random = optional(&run.random_endpoint)?;

    let mut options = EvaluateOptions::new(config.clone());
    options.background = run.background.clone().unwrap_or_else(|| hseg::metrics::DEFAULT_BACKGROUND.to_vec());
    options.noise_stdev = run.noise.unwrap_or(true).then_some(noise_stdev);
    options.stability_runs = run.stability.unwrap_or(true).then_some(stability_runs);
    options.second_model = second.as_deref();
    options.randomized_model = randomized.as_deref();
    options.random_outputs_model = random.as_deref();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Other(e.to_string()))?;
    let results: Vec<Result<(usize, MetricsReport), CliError>> = pool.install(|| {
        loaded
            .par_iter()
            .map(|l| {
                let name = l.instance.name();
                log::info!("evaluating {name}");
                let (e, report) =
                    evaluate_instance(&name, &l.image, &l.manifest, &adapter, &options)?;
                Ok((hseg::adapter::argmax(&e.original_probs), report))
            })
            .collect()
    });

    create_out_dir(out)?;
    let csv_path = out.join(METRICS_FILE);
    let mut writer = csv::Writer::from_path(&csv_path).map_err(csv_error(&csv_path))?;
    let mut header = vec!["instance", "label", "predicted"];
    header.extend(MetricsReport::csv_header().into_iter().skip(1));
    writer.write_record(&header).map_err(csv_error(&csv_path))?;

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut first_error = None;
    for (l, result) in loaded.iter().zip(results) {
        match result {
            Ok((predicted, report)) => {
                let mut row = report.csv_record();
                row.insert(1, l.instance.label.map(|v| v.to_string()).unwrap_or_default());
                row.insert(2, predicted.to_string());
                writer.write_record(&row).map_err(csv_error(&csv_path))?;
                reports.push(report);
            }
            Err(e) => {
                log::error!("{}: {e}", l.instance.name());
                failures.push(Failure {
                    instance: l.instance.name(),
                    error: e.to_string(),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    writer.flush().map_err(|e| CliError::io(&csv_path, e))?;
    write_json(
        &out.join(SUMMARY_FILE),
        &Summary {
            summary: aggregate(&reports),
            failures,
            config,
        },
    )?;
    first_error.map_or(Ok(()), Err)
}

#[derive(Debug, Serialize)]
struct SweepRow {
    theta: u64,
    #[serde(flatten)]
    stats: SegmentationStats,
}

/// Segment counts for one θ. When nothing survives the filter the counts
/// are zero and the whole image counts as empty.
fn stats_for_theta(
    manifest: &SegmentManifest,
    image: &ImageBuffer,
    theta: u64,
    t: &BigRational,
) -> Result<SegmentationStats, CliError> {
    let kept = match filter_small_segments(manifest, theta) {
        Ok(kept) => kept,
        Err(hseg::HierarchyError::DegenerateSegmentation(_)) => {
            return Ok(SegmentationStats {
                initial_segments: manifest.segments().len(),
                after_filter: 0,
                top_level: 0,
                final_features: 0,
                empty_fraction: 1.0,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let hierarchy = build_hierarchy(&kept, t.clone())?;
    let ids = select_depth_features(&hierarchy, 1, &[])?;
    let features = fill_empty_space(&ids, manifest, image)?;
    Ok(segmentation_stats(manifest, theta, &hierarchy, &features))
}

pub fn sweep_theta(run: &RunConfig) -> Result<(), CliError> {
    let masks_path = RunConfig::require(&run.masks, "masks")?;
    let out = RunConfig::require(&run.out, "out")?;
    let values = RunConfig::require(&run.values, "values")?;
    if values.is_empty() {
        return Err(CliError::Config("values must list at least one θ".into()));
    }
    let config = run.explain_config()?;
    let t = BigRational::from_threshold(config.t)
        .ok_or_else(|| CliError::Config(format!("t = {} is not representable", config.t)))?;
    let manifest = load_manifest(masks_path)?;
    let image = match &run.image {
        Some(p) => load_image(p)?,
        None => ImageBuffer::filled(manifest.width(), manifest.height(), &[0])?,
    };

    let rows = values
        .iter()
        .map(|&theta| {
            Ok(SweepRow {
                theta,
                stats: stats_for_theta(&manifest, &image, theta, &t)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    create_out_dir(out)?;
    let csv_path = out.join(SWEEP_CSV);
    let mut writer = csv::Writer::from_path(&csv_path).map_err(csv_error(&csv_path))?;
    writer
        .write_record(["theta", "initial_segments", "after_filter", "top_level", "final_features", "empty_fraction"])
        .map_err(csv_error(&csv_path))?;
    for SweepRow { theta, stats: s } in &rows {
        writer
            .write_record([
                theta.to_string(),
                s.initial_segments.to_string(),
                s.after_filter.to_string(),
                s.top_level.to_string(),
                s.final_features.to_string(),
                s.empty_fraction.to_string(),
            ])
            .map_err(csv_error(&csv_path))?;
    }
    writer.flush().map_err(|e| CliError::io(&csv_path, e))?;
    write_json(&out.join(SWEEP_JSON), &rows)
}

/// Resolves `--config` and flags into one configuration.
pub fn resolve(config: Option<&PathBuf>, flags: RunConfig) -> Result<RunConfig, CliError> {
    Ok(match config {
        Some(path) => RunConfig::load(path)?.overlay(flags),
        None => flags,
    })
}

pub fn serve_mock(args: &crate::mock_model::MockArgs) -> Result<(), CliError> {
    let model = crate::mock_model::build(args)?;
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    crate::mock_model::serve(&model as &dyn ModelAdapter, stdin.lock(), stdout.lock())
        .map_err(|e| CliError::Io(e.to_string()))
}
