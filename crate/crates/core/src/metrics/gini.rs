use crate::scalar::Real;

/// Gini coefficient of `|c|`: `Σᵢ Σⱼ |aᵢ − aⱼ| / (2 n² μ)`, zero when every
/// coefficient is zero. Computed in `O(n log n)` from the sorted values.
pub fn gini<T: Real>(coefficients: &[T]) -> T {
    let n = coefficients.len();
    if n == 0 {
        return T::zero();
    }
    let mut a: Vec<T> = coefficients.iter().map(|c| c.abs()).collect();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let total: T = a.iter().copied().sum();
    if total == T::zero() {
        return T::zero();
    }
    // Σᵢ Σⱼ |aᵢ − aⱼ| = 2 Σᵢ (2i − n + 1) aᵢ over ascending a (0-based i).
    let nf = T::from_count(n);
    let weighted: T = a
        .iter()
        .enumerate()
        .map(|(i, &v)| (T::from_count(2 * i + 1) - nf) * v)
        .sum();
    (weighted / (nf * total)).max(T::zero()).min(T::one())
}
