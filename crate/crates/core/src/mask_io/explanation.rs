use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MaskIoError;
use crate::hierarchy::SegmentationStats;
use crate::lime::Explanation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub id: u64,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub intercept: f64,
    pub target_class: usize,
    pub sigma: f64,
    pub lambda: f64,
    pub weighted_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthEntry {
    pub depth: usize,
    pub features: Vec<FeatureEntry>,
    pub selected: Vec<u64>,
    pub expanded: Vec<u64>,
    pub fit: FitEntry,
}

/// Serialized explanation:
/// `{"image":..,"config":{..},"depths":[..],"stats":{..},"target_class":..,"original_probs":[..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationDocument {
    pub image: String,
    pub config: serde_json::Value,
    pub depths: Vec<DepthEntry>,
    pub stats: SegmentationStats,
    pub target_class: usize,
    pub original_probs: Vec<f64>,
}

impl ExplanationDocument {
    /// `config` defaults to the explanation's own hyperparameters.
    pub fn new(explanation: &Explanation, image: &str, config: Option<serde_json::Value>) -> Self {
        let depths = explanation
            .depths
            .iter()
            .map(|d| DepthEntry {
                depth: d.depth,
                features: d
                    .features
                    .feature_ids()
                    .iter()
                    .zip(&d.fit.coefficients)
                    .map(|(&id, &coefficient)| FeatureEntry { id, coefficient })
                    .collect(),
                selected: d.selected.clone(),
                expanded: d.expanded.clone(),
                fit: FitEntry {
                    intercept: d.fit.intercept,
                    target_class: d.fit.target_class,
                    sigma: d.fit.sigma,
                    lambda: d.fit.lambda,
                    weighted_loss: d.fit.weighted_loss,
                },
            })
            .collect();
        ExplanationDocument {
            image: image.to_string(),
            config: config.unwrap_or_else(|| {
                serde_json::to_value(&explanation.config).expect("config is serializable")
            }),
            depths,
            stats: explanation.stats.clone(),
            target_class: explanation.target_class,
            original_probs: explanation.original_probs.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("explanation serialization is infallible")
    }

    pub fn from_json(json: &str) -> Result<Self, MaskIoError> {
        serde_json::from_str(json).map_err(|e| MaskIoError::Schema(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MaskIoError> {
        let path = path.as_ref();
        let json = fs::read_to_string(path).map_err(|e| MaskIoError::io(path, e))?;
        ExplanationDocument::from_json(&json)
    }
}

pub fn write_explanation(
    document: &ExplanationDocument,
    path: impl AsRef<Path>,
) -> Result<(), MaskIoError> {
    let path = path.as_ref();
    let mut json = document.to_json();
    json.push('\n');
    fs::write(path, json).map_err(|e| MaskIoError::io(path, e))
}
