use crate::scalar::Real;

use super::BinaryMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("normal equations are singular; use a positive ridge strength")]
    SingularSystem,
    #[error("invalid surrogate input: {0}")]
    InvalidInput(String),
}

/// Perturbed samples with their proximity weights and model outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<T> {
    z: BinaryMatrix,
    weights: Vec<T>,
    predictions: Vec<Vec<T>>,
    sigma: T,
}

impl<T: Real> SampleBatch<T> {
    /// Checks that row 0 is all ones with weight 1, all weights lie in
    /// `(0, 1]`, and prediction rows are probability vectors.
    pub fn new(
        z: BinaryMatrix,
        weights: Vec<T>,
        predictions: Vec<Vec<T>>,
        sigma: T,
    ) -> Result<Self, FitError> {
        let n = z.rows();
        if n == 0 || weights.len() != n || predictions.len() != n {
            return Err(FitError::InvalidInput(format!(
                "{n} samples, {} weights, {} predictions",
                weights.len(),
                predictions.len()
            )));
        }
        if z.row(0).iter().any(|&v| v != 1) || weights[0] != T::one() {
            return Err(FitError::InvalidInput(
                "row 0 must be the unperturbed instance with weight 1".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > T::zero() && w <= T::one())) {
            return Err(FitError::InvalidInput("weights must lie in (0, 1]".into()));
        }
        let tol = T::lit(1e-4);
        for (i, p) in predictions.iter().enumerate() {
            let s: T = p.iter().copied().sum();
            if p.is_empty() || (s - T::one()).abs() > tol || p.iter().any(|v| !v.is_finite()) {
                return Err(FitError::InvalidInput(format!(
                    "prediction {i} is not a probability vector"
                )));
            }
        }
        Ok(SampleBatch {
            z,
            weights,
            predictions,
            sigma,
        })
    }

    pub fn z(&self) -> &BinaryMatrix {
        &self.z
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn predictions(&self) -> &[Vec<T>] {
        &self.predictions
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Probability of `class` for every sample.
    pub fn targets(&self, class: usize) -> Vec<T> {
        self.predictions
            .iter()
            .map(|p| p.get(class).copied().unwrap_or_else(T::zero))
            .collect()
    }
}

/// Weighted ridge solution with an unpenalized intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSolution<T> {
    pub coefficients: Vec<T>,
    pub intercept: T,
    pub lambda: T,
    /// `Σ wᵢ (yᵢ − b − β·zᵢ)²`, penalty excluded.
    pub weighted_loss: T,
}

/// Local linear surrogate `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateFit<T> {
    pub coefficients: Vec<T>,
    pub intercept: T,
    pub sigma: T,
    pub lambda: T,
    pub target_class: usize,
    pub weighted_loss: T,
}

/// Minimizes `Σ wᵢ (yᵢ − b − β·zᵢ)² + λ‖β‖²` through the normal equations
/// and a Cholesky factorization.
pub fn weighted_ridge<T: Real>(
    z: &BinaryMatrix,
    weights: &[T],
    y: &[T],
    lambda: T,
) -> Result<RidgeSolution<T>, FitError> {
    let (n, d) = (z.rows(), z.cols());
    if weights.len() != n || y.len() != n {
        return Err(FitError::InvalidInput(format!(
            "{n} samples, {} weights, {} targets",
            weights.len(),
            y.len()
        )));
    }
    if lambda < T::zero() || !lambda.is_finite() {
        return Err(FitError::InvalidInput("ridge strength must be finite and ≥ 0".into()));
    }
    if weights.iter().chain(y).any(|v| !v.is_finite()) || weights.iter().any(|&w| w < T::zero()) {
        return Err(FitError::InvalidInput("weights and targets must be finite".into()));
    }
    if n < d + 1 {
        log::warn!("fitting {d} features from only {n} samples");
    }

    // Targets are shifted by the first sample so that a constant target
    // yields exactly zero coefficients; the shift returns in the intercept.
    let shift = y.first().copied().unwrap_or_else(T::zero);
    // Design column 0 is the intercept.
    let m = d + 1;
    let mut gram = vec![T::zero(); m * m];
    let mut rhs = vec![T::zero(); m];
    for (i, row) in z.iter_rows().enumerate() {
        let w = weights[i];
        let wy = w * (y[i] - shift);
        let active: Vec<usize> = std::iter::once(0)
            .chain(row.iter().enumerate().filter(|(_, &v)| v == 1).map(|(j, _)| j + 1))
            .collect();
        for (a, &p) in active.iter().enumerate() {
            rhs[p] = rhs[p] + wy;
            for &q in &active[a..] {
                gram[p * m + q] = gram[p * m + q] + w;
            }
        }
    }
    for p in 0..m {
        for q in 0..p {
            gram[p * m + q] = gram[q * m + p];
        }
    }
    for j in 1..m {
        gram[j * m + j] = gram[j * m + j] + lambda;
    }

    let beta = cholesky_solve(&mut gram, &rhs, m)?;
    let intercept = beta[0] + shift;
    let coefficients = beta[1..].to_vec();

    let weighted_loss = z
        .iter_rows()
        .enumerate()
        .map(|(i, row)| {
            let pred = row
                .iter()
                .zip(&coefficients)
                .filter(|(&v, _)| v == 1)
                .fold(intercept, |acc, (_, &c)| acc + c);
            let r = y[i] - pred;
            weights[i] * r * r
        })
        .fold(T::zero(), |a, b| a + b);

    if coefficients.iter().any(|c| !c.is_finite()) || !intercept.is_finite() {
        return Err(FitError::SingularSystem);
    }
    Ok(RidgeSolution {
        coefficients,
        intercept,
        lambda,
        weighted_loss,
    })
}

/// In-place Cholesky of the symmetric `m × m` matrix `a`, then two
/// triangular solves against `b`.
fn cholesky_solve<T: Real>(a: &mut [T], b: &[T], m: usize) -> Result<Vec<T>, FitError> {
    let scale = (0..m).map(|i| a[i * m + i].abs()).fold(T::zero(), T::max);
    let tol = T::epsilon() * T::from_count(m) * T::lit(16.0) * scale;
    for j in 0..m {
        let mut diag = a[j * m + j];
        for k in 0..j {
            diag = diag - a[j * m + k] * a[j * m + k];
        }
        if !(diag > tol) {
            return Err(FitError::SingularSystem);
        }
        let l_jj = diag.sqrt();
        a[j * m + j] = l_jj;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s = s - a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / l_jj;
        }
    }
    let mut x = b.to_vec();
    for i in 0..m {
        let mut s = x[i];
        for k in 0..i {
            s = s - a[i * m + k] * x[k];
        }
        x[i] = s / a[i * m + i];
    }
    for i in (0..m).rev() {
        let mut s = x[i];
        for k in i + 1..m {
            s = s - a[k * m + i] * x[k];
        }
        x[i] = s / a[i * m + i];
    }
    Ok(x)
}

/// Fits the surrogate to the probability of `target_class`.
pub fn fit_surrogate<T: Real>(
    batch: &SampleBatch<T>,
    target_class: usize,
    lambda: T,
) -> Result<SurrogateFit<T>, FitError> {
    let y = batch.targets(target_class);
    let sol = weighted_ridge(batch.z(), batch.weights(), &y, lambda)?;
    Ok(SurrogateFit {
        coefficients: sol.coefficients,
        intercept: sol.intercept,
        sigma: batch.sigma(),
        lambda: sol.lambda,
        target_class,
        weighted_loss: sol.weighted_loss,
    })
}
