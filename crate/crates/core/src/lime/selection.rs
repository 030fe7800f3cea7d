use crate::scalar::Real;

/// At most this many features are reported as significant.
pub const MAX_SELECTED: usize = 3;
/// Threshold multiplier on the population standard deviation.
pub const SELECTION_STD_FACTOR: f64 = 1.5;

/// Indices of features whose coefficient exceeds `mean + 1.5·std`
/// (population std), largest first, capped at [`MAX_SELECTED`]. Falls back to
/// the single largest coefficient (lowest index on ties) when none clears
/// the threshold.
pub fn select_significant<T: Real>(coefficients: &[T]) -> Vec<usize> {
    assert!(!coefficients.is_empty(), "no coefficients to select from");
    let n = T::from_count(coefficients.len());
    let mean = coefficients.iter().copied().sum::<T>() / n;
    let var = coefficients
        .iter()
        .map(|&c| (c - mean) * (c - mean))
        .sum::<T>()
        / n;
    let tau = mean + T::lit(SELECTION_STD_FACTOR) * var.sqrt();

    let mut order: Vec<usize> = (0..coefficients.len()).collect();
    order.sort_by(|&a, &b| {
        coefficients[b]
            .partial_cmp(&coefficients[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let selected: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| coefficients[i] > tau)
        .take(MAX_SELECTED)
        .collect();
    if selected.is_empty() {
        vec![order[0]]
    } else {
        selected
    }
}
