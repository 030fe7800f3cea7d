use super::MaskIoError;

/// Row-major bitmap packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bitmap {
    width: u32,
    height: u32,
    words: Vec<u64>,
}

impl std::fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bitmap")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("ones", &self.count_ones())
            .finish()
    }
}

impl Bitmap {
    pub fn new(width: u32, height: u32) -> Self {
        let len = width as usize * height as usize;
        Bitmap {
            width,
            height,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(width: u32, height: u32, bits: &[bool]) -> Self {
        assert_eq!(bits.len(), width as usize * height as usize);
        let mut bitmap = Bitmap::new(width, height);
        for (k, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            bitmap.set(k);
        }
        bitmap
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, k: usize) -> bool {
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, k: usize) {
        self.words[k / 64] |= 1 << (k % 64);
    }

    #[inline]
    pub fn clear(&mut self, k: usize) {
        self.words[k / 64] &= !(1 << (k % 64));
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// `|self ∩ other|`. Both bitmaps must share dimensions.
    pub fn intersection_count(&self, other: &Bitmap) -> u64 {
        debug_assert_eq!((self.width, self.height), (other.width, other.height));
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| u64::from((a & b).count_ones()))
            .sum()
    }

    /// Indices of set pixels in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|k| self.get(k)).collect()
    }
}

/// Expands alternating zero/one runs (first run counts zeros) over a
/// row-major `width × height` grid.
pub fn decode_rle(runs: &[u64], width: u32, height: u32) -> Result<Bitmap, MaskIoError> {
    let expected = u64::from(width) * u64::from(height);
    let actual = runs
        .iter()
        .try_fold(0u64, |acc, &r| acc.checked_add(r))
        .unwrap_or(u64::MAX);
    if actual != expected {
        return Err(MaskIoError::LengthMismatch {
            segment: None,
            expected,
            actual,
        });
    }
    let mut bitmap = Bitmap::new(width, height);
    let mut pos = 0usize;
    for (i, &run) in runs.iter().enumerate() {
        let run = run as usize;
        if i % 2 == 1 {
            for k in pos..pos + run {
                bitmap.set(k);
            }
        }
        pos += run;
    }
    Ok(bitmap)
}

/// Canonical run list: starts with a (possibly empty) zero run and contains
/// no empty interior runs.
pub fn encode_rle(bitmap: &Bitmap) -> Vec<u64> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut count = 0u64;
    for k in 0..bitmap.len() {
        let bit = bitmap.get(k);
        if bit != current {
            runs.push(count);
            current = bit;
            count = 0;
        }
        count += 1;
    }
    runs.push(count);
    runs
}
