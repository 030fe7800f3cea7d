use crate::scalar::Real;

use super::BinaryMatrix;

/// `exp(-D²/σ²)` for a binary row with `zeros` switched-off features, where
/// `D` is the L2 distance to the all-ones vector (so `D² = zeros`).
///
/// Results that would underflow to zero are clamped to the smallest positive
/// normal value so every sample keeps a strictly positive weight.
pub fn kernel_weight<T: Real>(zeros: usize, sigma: T) -> T {
    assert!(sigma > T::zero(), "kernel width must be positive");
    let w = (-T::from_count(zeros) / (sigma * sigma)).exp();
    w.max(T::min_positive_value())
}

/// Kernel weight of every row of `z`.
pub fn kernel_weights<T: Real>(z: &BinaryMatrix, sigma: T) -> Vec<T> {
    (0..z.rows())
        .map(|i| kernel_weight(z.zeros_in_row(i), sigma))
        .collect()
}
