use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hierarchy::FeatureSpace;
use crate::mask_io::ImageBuffer;

/// Dense `rows × cols` matrix of 0/1 states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        assert!(rows.iter().flatten().all(|&v| v <= 1), "entries must be 0 or 1");
        BinaryMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u8]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    /// Number of switched-off features in row `i`.
    pub fn zeros_in_row(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&v| v == 0).count()
    }
}

/// `n × d` sample matrix; row 0 is all ones, the rest are i.i.d. fair coin
/// flips from ChaCha8 seeded with `seed` (stream 0).
pub fn generate_samples(features: usize, n: usize, seed: u64) -> BinaryMatrix {
    generate_samples_stream(features, n, seed, 0)
}

/// Same as [`generate_samples`] on an independent ChaCha8 stream.
///
/// Bits are taken least-significant first from successive `next_u64`
/// words, so output depends only on the ChaCha8 keystream.
pub fn generate_samples_stream(features: usize, n: usize, seed: u64, stream: u64) -> BinaryMatrix {
    assert!(features >= 1 && n >= 2, "need at least one feature and two samples");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut data = vec![1u8; features * n];
    let mut word = 0u64;
    let mut left = 0u32;
    for v in &mut data[features..] {
        if left == 0 {
            word = rng.next_u64();
            left = 64;
        }
        *v = (word & 1) as u8;
        word >>= 1;
        left -= 1;
    }
    BinaryMatrix {
        rows: n,
        cols: features,
        data,
    }
}

/// Image with every feature whose state is 0 flattened to its mean colour.
pub fn render_perturbation(image: &ImageBuffer, features: &FeatureSpace, states: &[u8]) -> ImageBuffer {
    assert_eq!(states.len(), features.len(), "one state per feature");
    let fills: Vec<Option<Vec<u8>>> = states
        .iter()
        .enumerate()
        .map(|(f, &s)| (s == 0).then(|| features.fill_color(f)))
        .collect();
    let mut out = image.clone();
    if fills.iter().all(Option::is_none) {
        return out;
    }
    for k in 0..image.pixel_count() {
        if let Some(color) = &fills[features.label(k)] {
            out.pixel_mut(k).copy_from_slice(color);
        }
    }
    out
}
