//! JSON objects exchanged with model servers.
//!
//! ```text
//! request:  {"images":[{"width":W,"height":H,"channels":C,"pixels_b64":"..."}]}
//! response: {"outputs":[{"probs":[...]}]}
//! meta:     {"num_classes":N,"model_name":"..."}
//! ```
//!
//! `pixels_b64` is standard padded base64 of the row-major interleaved bytes.
//! Over the subprocess transport a meta query is the line
//! `{"method":"meta"}`.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{AdapterError, ModelMeta, ModelOutput};
use crate::mask_io::ImageBuffer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireImage {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub pixels_b64: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub images: Vec<WireImage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireOutput {
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub outputs: Vec<WireOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRequest {
    pub method: String,
}

pub fn encode_request(images: &[ImageBuffer]) -> String {
    let request = PredictRequest {
        images: images
            .iter()
            .map(|img| WireImage {
                width: img.width(),
                height: img.height(),
                channels: img.channels(),
                pixels_b64: STANDARD.encode(img.pixels()),
            })
            .collect(),
    };
    serde_json::to_string(&request).expect("request serialization is infallible")
}

/// Server-side decoding of a predict request.
pub fn decode_request(body: &str) -> Result<Vec<ImageBuffer>, AdapterError> {
    let request: PredictRequest =
        serde_json::from_str(body).map_err(|e| AdapterError::Protocol(e.to_string()))?;
    request
        .images
        .into_iter()
        .map(|w| {
            let pixels = STANDARD
                .decode(w.pixels_b64.as_bytes())
                .map_err(|e| AdapterError::Protocol(format!("pixels_b64: {e}")))?;
            ImageBuffer::new(w.width, w.height, w.channels, pixels)
                .map_err(|e| AdapterError::Protocol(e.to_string()))
        })
        .collect()
}

pub fn encode_response(outputs: &[Vec<f64>]) -> String {
    let response = PredictResponse {
        outputs: outputs
            .iter()
            .map(|p| WireOutput { probs: p.clone() })
            .collect(),
    };
    serde_json::to_string(&response).expect("response serialization is infallible")
}

/// Parses a predict response and validates it against the request size.
pub fn decode_response(
    body: &str,
    expected: usize,
    latency_ms: f64,
) -> Result<Vec<ModelOutput>, AdapterError> {
    let response: PredictResponse =
        serde_json::from_str(body).map_err(|e| AdapterError::Protocol(e.to_string()))?;
    if response.outputs.len() != expected {
        return Err(AdapterError::Protocol(format!(
            "sent {expected} images, received {} outputs",
            response.outputs.len()
        )));
    }
    let per_item = latency_ms / expected.max(1) as f64;
    response
        .outputs
        .into_iter()
        .map(|o| ModelOutput::new(o.probs, per_item))
        .collect()
}

pub fn encode_meta_request() -> String {
    serde_json::to_string(&MetaRequest {
        method: "meta".into(),
    })
    .expect("meta request serialization is infallible")
}

pub fn decode_meta(body: &str) -> Result<ModelMeta, AdapterError> {
    let meta: ModelMeta =
        serde_json::from_str(body).map_err(|e| AdapterError::Protocol(e.to_string()))?;
    if meta.num_classes == 0 {
        return Err(AdapterError::Validation("num_classes must be positive".into()));
    }
    Ok(meta)
}
