//! Evaluators for the quantitative guarantees: the finite-sample risk bound,
//! the Rademacher-complexity bound behind it, subspace coherence, and the
//! sampling-threshold lower bound on the indicator parameter.
//!
//! All logarithms are natural.

use crate::datamodel::SubspaceEstimate;
use crate::error::{invalid_param, Result};

/// Inputs of the risk-bound evaluator.
///
/// `k` is a universal constant the underlying concentration argument does
/// not pin down; it defaults to 1 and is not a quantity estimated from data.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub n: u64,
    pub m: u64,
    pub ambient_dim: u64,
    /// l1 radius of the weight class.
    pub r1: f64,
    /// Sup-norm bound on the features.
    pub b_x: f64,
    /// Bound on the labels.
    pub b_y: f64,
    pub gamma: f64,
    pub delta_prob: f64,
    pub k: f64,
    pub empirical_loss: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid_param("n", "must be positive"));
        }
        if self.m == 0 {
            return Err(invalid_param("m", "must be positive"));
        }
        if self.ambient_dim == 0 {
            return Err(invalid_param("D", "must be positive"));
        }
        for (name, v) in [("R1", self.r1), ("B_X", self.b_x), ("B_Y", self.b_y), ("K", self.k)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid_param(name, "must be positive"));
            }
        }
        if !self.gamma.is_finite() || !(0.0..1.0).contains(&self.gamma) {
            return Err(invalid_param("gamma", "must lie in [0, 1)"));
        }
        if !self.delta_prob.is_finite() || self.delta_prob <= 0.0 || self.delta_prob >= 1.0 {
            return Err(invalid_param("delta_prob", "must lie in (0, 1)"));
        }
        if !self.empirical_loss.is_finite() || self.empirical_loss < 0.0 {
            return Err(invalid_param("empirical_loss", "must be nonnegative"));
        }
        Ok(())
    }
}

/// The loss-range constant `b = 2 (B_Y + D R1 / (m (1 - gamma)))^2`.
pub fn loss_range_constant(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let d = p.ambient_dim as f64;
    let m = p.m as f64;
    Ok(2.0 * (p.b_y + d * p.r1 / (m * (1.0 - p.gamma))).powi(2))
}

/// Right-hand side of the high-probability risk bound: empirical loss plus
/// the K-scaled complexity and concentration corrections.
pub fn theorem1_rhs(p: &BoundParams) -> Result<f64> {
    let b = loss_range_constant(p)?;
    let n = p.n as f64;
    let m = p.m as f64;
    let d = p.ambient_dim as f64;
    let complexity = d * p.r1 * p.b_x / (1.0 - p.gamma);
    let rate = m / n + 1.0 / n.sqrt();
    let tail = b * (1.0 / p.delta_prob).ln() / n;
    Ok(p.empirical_loss
        + p.k
            * (p.empirical_loss.sqrt() * (rate * complexity + tail.sqrt())
                + tail
                + n.ln().powi(3) * rate.powi(2) * complexity.powi(2)))
}

/// Rademacher-complexity bound of the thresholded projection class:
/// `(50 m / n + 14 / sqrt(n)) * 3 D R1 B_X / (1 - gamma)`.
pub fn rademacher_bound(
    n: u64,
    m: u64,
    ambient_dim: u64,
    r1: f64,
    b_x: f64,
    gamma: f64,
) -> Result<f64> {
    if n == 0 || m == 0 || ambient_dim == 0 {
        return Err(invalid_param("n/m/D", "must be positive"));
    }
    for (name, v) in [("R1", r1), ("B_X", b_x)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(invalid_param(name, "must be positive"));
        }
    }
    if !gamma.is_finite() || !(0.0..1.0).contains(&gamma) {
        return Err(invalid_param("gamma", "must lie in [0, 1)"));
    }
    let nf = n as f64;
    Ok((50.0 * m as f64 / nf + 14.0 / nf.sqrt())
        * 3.0 * ambient_dim as f64 * r1 * b_x
        / (1.0 - gamma))
}

/// Coherence of the spanned subspace: `(D/d) max_j ||row_j(U)||^2`. For an
/// orthonormal basis the projection of a standard basis vector has squared
/// norm equal to the squared norm of the corresponding basis row, so the
/// value always lies in [1, D/d]. Non-orthonormal bases are rejected by
/// [`SubspaceEstimate`] construction.
pub fn coherence(subspace: &SubspaceEstimate) -> f64 {
    let basis = subspace.basis();
    let (big_d, d) = (subspace.ambient_dim() as f64, subspace.intrinsic_dim() as f64);
    let max_row_sq = (0..basis.nrows())
        .map(|j| basis.row(j).norm_squared())
        .fold(0.0f64, f64::max);
    big_d / d * max_row_sq
}

/// Smallest indicator parameter for which a uniformly random size-m
/// observation keeps the restricted Gram matrix invertible with probability
/// 1 - delta: `sqrt(8 d mu ln(2d/delta) / (3m))`. `m` is accepted as a real
/// so expected observation counts can be plugged in directly.
pub fn gamma_lower_bound(d: u64, mu: f64, m: f64, delta_prob: f64) -> Result<f64> {
    if d == 0 {
        return Err(invalid_param("d", "must be positive"));
    }
    if !m.is_finite() || m <= 0.0 {
        return Err(invalid_param("m", "must be positive"));
    }
    if !mu.is_finite() || mu <= 0.0 {
        return Err(invalid_param("mu", "must be positive"));
    }
    if !delta_prob.is_finite() || delta_prob <= 0.0 || delta_prob >= 1.0 {
        return Err(invalid_param("delta_prob", "must lie in (0, 1)"));
    }
    let df = d as f64;
    Ok((8.0 * df * mu * (2.0 * df / delta_prob).ln() / (3.0 * m)).sqrt())
}
