use std::sync::OnceLock;
use std::time::Instant;

use super::wire::{decode_meta, decode_response, encode_request};
use super::{AdapterError, ConnectOptions, ModelAdapter, ModelMeta, ModelOutput, RetryPolicy};
use crate::mask_io::ImageBuffer;

/// JSON-over-HTTP client. Shareable across threads.
pub struct HttpAdapter {
    base: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
    meta: OnceLock<ModelMeta>,
}

impl std::fmt::Debug for HttpAdapter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpAdapter").field("base", &self.base).finish()
    }
}

impl HttpAdapter {
    pub fn new(base_url: &str, options: &ConnectOptions) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(options.timeout))
            .http_status_as_error(false)
            .build();
        HttpAdapter {
            base: base_url.trim_end_matches('/').to_string(),
            agent: ureq::Agent::new_with_config(config),
            retry: options.retry,
            meta: OnceLock::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn read(
        &self,
        result: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<String, AdapterError> {
        let mut response = result.map_err(classify)?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .with_config()
            .limit(256 * 1024 * 1024)
            .read_to_string()
            .map_err(classify)?;
        match status {
            200..=299 => Ok(body),
            500..=599 => Err(AdapterError::Transport(format!("server error {status}: {body}"))),
            _ => Err(AdapterError::Protocol(format!("unexpected status {status}: {body}"))),
        }
    }
}

fn classify(e: ureq::Error) -> AdapterError {
    match e {
        ureq::Error::Io(_)
        | ureq::Error::Timeout(_)
        | ureq::Error::HostNotFound
        | ureq::Error::ConnectionFailed
        | ureq::Error::BodyStalled => AdapterError::Transport(e.to_string()),
        other => AdapterError::Protocol(other.to_string()),
    }
}

impl ModelAdapter for HttpAdapter {
    fn predict_batch(&self, images: &[ImageBuffer]) -> Result<Vec<ModelOutput>, AdapterError> {
        if images.is_empty() {
            return Err(AdapterError::Protocol("empty batch".into()));
        }
        let body = encode_request(images);
        let url = format!("{}/v1/predict", self.base);
        self.retry.run(|| {
            let start = Instant::now();
            let text = self.read(
                self.agent
                    .post(&url)
                    .content_type("application/json")
                    .send(body.as_bytes()),
            )?;
            decode_response(&text, images.len(), start.elapsed().as_secs_f64() * 1e3)
        })
    }

    fn meta(&self) -> Result<ModelMeta, AdapterError> {
        if let Some(m) = self.meta.get() {
            return Ok(m.clone());
        }
        let url = format!("{}/v1/meta", self.base);
        let meta = self
            .retry
            .run(|| decode_meta(&self.read(self.agent.get(&url).call())?))?;
        Ok(self.meta.get_or_init(|| meta).clone())
    }
}
