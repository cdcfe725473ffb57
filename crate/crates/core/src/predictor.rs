//! The thresholded subspace-projection regressor shared by both trainers.
//!
//! A sample is projected onto the basis restricted to its observed rows;
//! the prediction is emitted only when the restricted Gram matrix is well
//! conditioned enough that the projection can be trusted, and is zero
//! otherwise.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::datamodel::{Dataset, ObservedSample, RegressionWeights, SubspaceEstimate};
use crate::error::{Error, Result};

/// Condition-number cap beyond which the restricted Gram matrix counts as
/// singular and the indicator fails.
const CONDITION_CAP: f64 = 1e12;

/// Output of a single prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub value: f64,
    pub indicator_passed: bool,
    /// Operator norm of the inverse restricted Gram matrix; infinite when
    /// the matrix is numerically singular.
    pub projection_norm: f64,
}

/// Predicts a label: `wᵀ (U_Ωᵀ U_Ω)^{-1} U_Ωᵀ x_Ω` when the inverse Gram
/// norm stays below `D / (m (1 - gamma))`, zero otherwise. An empty
/// observation or a numerically singular Gram matrix fails the indicator.
pub fn predict(
    subspace: &SubspaceEstimate,
    weights: &RegressionWeights,
    gamma: f64,
    sample: &ObservedSample,
    ambient_dim: usize,
) -> Result<Prediction> {
    if subspace.ambient_dim() != ambient_dim {
        return Err(Error::DimensionMismatch {
            what: "basis rows",
            expected: ambient_dim,
            got: subspace.ambient_dim(),
        });
    }
    let d = subspace.intrinsic_dim();
    if weights.dim() != d {
        return Err(Error::DimensionMismatch {
            what: "weights",
            expected: d,
            got: weights.dim(),
        });
    }
    if let Some(&j) = sample.indices.iter().find(|&&j| j >= ambient_dim) {
        return Err(Error::DimensionMismatch {
            what: "sample index",
            expected: ambient_dim,
            got: j,
        });
    }

    let m = sample.observed_count();
    if m == 0 {
        return Ok(Prediction {
            value: 0.0,
            indicator_passed: false,
            projection_norm: f64::INFINITY,
        });
    }

    let basis = subspace.basis();
    let mut u_omega = DMatrix::zeros(m, d);
    for (row, &j) in sample.indices.iter().enumerate() {
        for k in 0..d {
            u_omega[(row, k)] = basis[(j, k)];
        }
    }
    let gram = u_omega.tr_mul(&u_omega);
    let eig = SymmetricEigen::new(gram);
    let lambda_min = eig.eigenvalues.min();
    let lambda_max = eig.eigenvalues.max();

    let singular = lambda_min <= 0.0 || lambda_max / lambda_min > CONDITION_CAP;
    let projection_norm = if lambda_min > 0.0 {
        1.0 / lambda_min
    } else {
        f64::INFINITY
    };
    let threshold = ambient_dim as f64 / (m as f64 * (1.0 - gamma));
    if singular || projection_norm > threshold {
        return Ok(Prediction {
            value: 0.0,
            indicator_passed: false,
            projection_norm,
        });
    }

    let x_omega = sample.values_vector();
    let rhs = u_omega.tr_mul(&x_omega);
    let coeffs = eig.eigenvectors.tr_mul(&rhs);
    let scaled = DVector::from_fn(d, |i, _| coeffs[i] / eig.eigenvalues[i]);
    let x_tilde = &eig.eigenvectors * scaled;
    Ok(Prediction {
        value: weights.w.dot(&x_tilde),
        indicator_passed: true,
        projection_norm,
    })
}

/// Mean squared error of the predictor over a labeled dataset.
pub fn test_mse(
    subspace: &SubspaceEstimate,
    weights: &RegressionWeights,
    gamma: f64,
    ds: &Dataset,
) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for (i, sample) in ds.samples.iter().enumerate() {
        let y = sample.label.ok_or(Error::UnlabeledSample { index: Some(i) })?;
        let pred = predict(subspace, weights, gamma, sample, ds.ambient_dim)?;
        total += (y - pred.value).powi(2);
    }
    Ok(total / ds.len() as f64)
}
