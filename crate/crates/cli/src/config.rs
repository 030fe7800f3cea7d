//! Run configuration: a JSON file whose keys mirror the command-line flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use hseg::adapter::{ConnectOptions, RetryPolicy, ENDPOINT_ENV};
use hseg::ExplainConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every setting is optional here; command-line values override file values
/// and unset ones fall back to the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Input image (PNG).
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Segment manifest (JSON).
    #[arg(long)]
    pub masks: Option<PathBuf>,
    /// Classifier: http://host:port or exec:<command>. Defaults to $HSEG_ENDPOINT.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Minimum segment size in pixels.
    #[arg(long)]
    pub theta: Option<u64>,
    /// Overlap threshold for parenthood.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub target_class: Option<usize>,
    /// Prediction batches in flight at once.
    #[arg(long)]
    pub parallel_batches: Option<usize>,

    /// Request timeout in seconds.
    #[arg(long)]
    pub timeout_secs: Option<f64>,
    /// Retries of transient adapter failures.
    #[arg(long)]
    pub retries: Option<u32>,

    /// Dataset list: `image masks [label]` per line.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Second model for contrastivity checks.
    #[arg(long)]
    pub endpoint2: Option<String>,
    /// Model with randomized weights.
    #[arg(long)]
    pub rand_endpoint: Option<String>,
    /// Model returning random outputs.
    #[arg(long)]
    pub random_endpoint: Option<String>,
    /// Instances evaluated in parallel.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Run the noise checks.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub noise: Option<bool>,
    #[arg(long)]
    pub noise_stdev: Option<f64>,
    /// Run repeated-run stability.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub stability: Option<bool>,
    #[arg(long)]
    pub stability_runs: Option<usize>,
    /// Single-deletion background, e.g. `0,0,0`.
    #[arg(long, value_delimiter = ',')]
    pub background: Option<Vec<u8>>,

    /// θ values for sweep-theta, e.g. `100,300,500`.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<u64>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `top` wins wherever it is set.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top; image, masks, endpoint, out, depth, top_k, theta, t, samples, batch,
            sigma, lambda, seed, target_class, parallel_batches, timeout_secs, retries, dataset,
            endpoint2, rand_endpoint, random_endpoint, jobs, noise, noise_stdev, stability,
            stability_runs, background, values)
    }

    pub fn explain_config(&self) -> Result<ExplainConfig, CliError> {
        let d = ExplainConfig::default();
        let cfg = ExplainConfig {
            depth: self.depth.unwrap_or(d.depth),
            top_k: self.top_k.unwrap_or(d.top_k),
            theta: self.theta.unwrap_or(d.theta),
            t: self.t.unwrap_or(d.t),
            n_samples: self.samples.unwrap_or(d.n_samples),
            batch_size: self.batch.unwrap_or(d.batch_size),
            sigma: self.sigma.unwrap_or(d.sigma),
            lambda: self.lambda.unwrap_or(d.lambda),
            seed: self.seed.unwrap_or(d.seed),
            target_class: self.target_class,
            parallel_batches: self.parallel_batches.unwrap_or(d.parallel_batches),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn connect_options(&self) -> Result<ConnectOptions, CliError> {
        let d = ConnectOptions::default();
        let timeout = match self.timeout_secs {
            Some(s) if !(s > 0.0 && s.is_finite()) => {
                return Err(CliError::Config(format!("timeout_secs must be positive, got {s}")))
            }
            Some(s) => Duration::from_secs_f64(s),
            None => d.timeout,
        };
        Ok(ConnectOptions {
            timeout,
            retry: RetryPolicy {
                retries: self.retries.unwrap_or(d.retry.retries),
                ..d.retry
            },
        })
    }

    /// The endpoint flag, else the environment variable.
    pub fn endpoint(&self) -> Result<String, CliError> {
        self.endpoint
            .clone()
            .or_else(|| std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.is_empty()))
            .ok_or_else(|| CliError::Config(format!("no endpoint given (--endpoint or ${ENDPOINT_ENV})")))
    }

    pub fn require<'a, T>(value: &'a Option<T>, key: &str) -> Result<&'a T, CliError> {
        value
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("missing required setting `{key}`")))
    }
}
