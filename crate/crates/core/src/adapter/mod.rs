//! Black-box classifier access.
//!
//! Two transports speak the same JSON objects: HTTP (`POST /v1/predict`,
//! `GET /v1/meta`) and a subprocess exchanging one object per line over
//! stdin/stdout. [`mock`] holds in-process classifiers with analytic
//! behaviour for tests and examples.

mod http;
pub mod mock;
mod subprocess;
pub mod wire;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::mask_io::ImageBuffer;

pub use self::http::HttpAdapter;
pub use self::subprocess::SubprocessAdapter;

/// Environment variable consulted when no endpoint is given explicitly.
pub const ENDPOINT_ENV: &str = "HSEG_ENDPOINT";

/// Tolerance on the probability-vector sum.
pub const PROB_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdapterError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid model output: {0}")]
    Validation(String),
}

impl AdapterError {
    /// Whether a retry might succeed.
    pub fn is_transient(&self) -> bool {
        matches!(self, AdapterError::Transport(_))
    }
}

/// One classifier response.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutput {
    probs: Vec<f64>,
    argmax_label: usize,
    raw_latency_ms: f64,
}

impl ModelOutput {
    /// Validates `probs`: finite, each in `[0, 1]`, summing to 1 within
    /// [`PROB_SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>, raw_latency_ms: f64) -> Result<Self, AdapterError> {
        if probs.is_empty() {
            return Err(AdapterError::Validation("empty probability vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
            return Err(AdapterError::Validation(format!(
                "probability {p} is outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(AdapterError::Validation(format!(
                "probabilities sum to {sum}"
            )));
        }
        let argmax_label = argmax(&probs);
        Ok(ModelOutput {
            probs,
            argmax_label,
            raw_latency_ms,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn argmax_label(&self) -> usize {
        self.argmax_label
    }

    pub fn raw_latency_ms(&self) -> f64 {
        self.raw_latency_ms
    }

    /// Probability of `class`, 0 when out of range.
    pub fn prob(&self, class: usize) -> f64 {
        self.probs.get(class).copied().unwrap_or(0.0)
    }
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub num_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_size: Option<[u32; 2]>,
    pub model_name: String,
}

/// Uniform access to a classifier `f`.
///
/// Implementations must return outputs aligned 1:1 with the inputs.
pub trait ModelAdapter: Send + Sync {
    fn predict_batch(&self, images: &[ImageBuffer]) -> Result<Vec<ModelOutput>, AdapterError>;

    fn meta(&self) -> Result<ModelMeta, AdapterError>;
}

impl<A: ModelAdapter + ?Sized> ModelAdapter for &A {
    fn predict_batch(&self, images: &[ImageBuffer]) -> Result<Vec<ModelOutput>, AdapterError> {
        (**self).predict_batch(images)
    }

    fn meta(&self) -> Result<ModelMeta, AdapterError> {
        (**self).meta()
    }
}

impl<A: ModelAdapter + ?Sized> ModelAdapter for Box<A> {
    fn predict_batch(&self, images: &[ImageBuffer]) -> Result<Vec<ModelOutput>, AdapterError> {
        (**self).predict_batch(images)
    }

    fn meta(&self) -> Result<ModelMeta, AdapterError> {
        (**self).meta()
    }
}

impl<A: ModelAdapter + ?Sized> ModelAdapter for std::sync::Arc<A> {
    fn predict_batch(&self, images: &[ImageBuffer]) -> Result<Vec<ModelOutput>, AdapterError> {
        (**self).predict_batch(images)
    }

    fn meta(&self) -> Result<ModelMeta, AdapterError> {
        (**self).meta()
    }
}

/// Retry schedule for transient transport failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub retries: u32,
    /// Delay before the first retry; doubles on each subsequent one.
    pub backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            retries: 3,
            backoff: Duration::from_millis(200),
        }
    }
}

impl RetryPolicy {
    pub(crate) fn run<T>(
        &self,
        mut attempt: impl FnMut() -> Result<T, AdapterError>,
    ) -> Result<T, AdapterError> {
        let mut delay = self.backoff;
        let mut tries = 0;
        loop {
            match attempt() {
                Err(e) if e.is_transient() && tries < self.retries => {
                    log::warn!("retrying after {e} (attempt {})", tries + 1);
                    std::thread::sleep(delay);
                    delay = delay.saturating_mul(2);
                    tries += 1;
                }
                other => return other,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectOptions {
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        ConnectOptions {
            timeout: Duration::from_secs(30),
            retry: RetryPolicy::default(),
        }
    }
}

/// Opens an adapter for `endpoint`.
///
/// `http://host:port[/prefix]` selects the HTTP transport; `exec:<command
/// line>` spawns a subprocess speaking line-delimited JSON.
pub fn connect(
    endpoint: &str,
    options: &ConnectOptions,
) -> Result<Box<dyn ModelAdapter>, AdapterError> {
    if let Some(cmd) = endpoint.strip_prefix("exec:") {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| AdapterError::Protocol("empty exec: endpoint".into()))?;
        Ok(Box::new(SubprocessAdapter::new(
            program,
            parts.collect(),
            options.retry,
        )))
    } else if endpoint.starts_with("http://") {
        Ok(Box::new(HttpAdapter::new(endpoint, options)))
    } else {
        Err(AdapterError::Protocol(format!(
            "unsupported endpoint {endpoint:?}; expected http://... or exec:..."
        )))
    }
}
