//! Serves an in-process mock classifier over the line-delimited protocol.

use std::io::{BufRead, Write};

use clap::{Args, ValueEnum};
use hseg::adapter::mock::{self, MockClassifier};
use hseg::adapter::wire::{decode_request, encode_response, MetaRequest};
use hseg::mask_io::BBox;
use hseg::ModelAdapter;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MockKind {
    /// Two classes, p(1) = base + gain · brightness of the region.
    Region,
    /// Fixed probabilities.
    Constant,
    /// 1 / classes everywhere.
    Uniform,
    /// Pseudo-random probabilities keyed by seed and image.
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct MockArgs {
    #[arg(long, value_enum)]
    pub kind: MockKind,
    /// Region as `min_row,min_col,max_row,max_col` (inclusive).
    #[arg(long, value_delimiter = ',')]
    pub bbox: Option<Vec<u32>>,
    #[arg(long, default_value_t = 0.2)]
    pub base: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gain: f64,
    /// Probabilities for `constant`, e.g. `0.3,0.7`.
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn build(args: &MockArgs) -> Result<MockClassifier, CliError> {
    Ok(match args.kind {
        MockKind::Region => {
            let b = args
                .bbox
                .as_deref()
                .filter(|b| b.len() == 4)
                .ok_or_else(|| CliError::Config("region mock needs --bbox r0,c0,r1,c1".into()))?;
            mock::region_brightness(
                BBox {
                    min_row: b[0],
                    min_col: b[1],
                    max_row: b[2],
                    max_col: b[3],
                },
                args.base,
                args.gain,
            )
        }
        MockKind::Constant => {
            let p = args
                .probs
                .clone()
                .ok_or_else(|| CliError::Config("constant mock needs --probs".into()))?;
            hseg::ModelOutput::new(p.clone(), 0.0)?;
            mock::constant(p)
        }
        MockKind::Uniform | MockKind::Random if args.classes == 0 => {
            return Err(CliError::Config("--classes must be positive".into()))
        }
        MockKind::Uniform => mock::uniform(args.classes),
        MockKind::Random => mock::random_outputs(args.seed, args.classes),
    })
}

/// Answers one request per input line until end of input. Malformed
/// requests get `{"error": ...}` so the client sees a protocol error.
pub fn serve(model: &dyn ModelAdapter, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<MetaRequest>(&line) {
            Ok(req) if req.method == "meta" => model
                .meta()
                .map(|m| serde_json::to_string(&m).expect("meta serializes"))
                .unwrap_or_else(|e| error_line(&e.to_string())),
            Ok(req) => error_line(&format!("unknown method {:?}", req.method)),
            Err(_) => match decode_request(&line).and_then(|imgs| model.predict_batch(&imgs)) {
                Ok(out) => {
                    let probs: Vec<Vec<f64>> = out.iter().map(|o| o.probs().to_vec()).collect();
                    encode_response(&probs)
                }
                Err(e) => error_line(&e.to_string()),
            },
        };
        writeln!(output, "{reply}")?;
        output.flush()?;
    }
    Ok(())
}

fn error_line(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}
