//! Synthetic data generation for the experiment protocol: a common random
//! orthonormal basis, standard-normal codes, a sparse weight vector,
//! Gaussian feature and label noise, and per-entry Bernoulli missingness
//! (with a with-replacement sampler available for the theory checks).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use slrm_core::{orthonormalize_polar, Dataset, ObservedSample};

use crate::error::{HarnessError, Result};
use crate::rng::{substream, STREAM_DATA, STREAM_MISSINGNESS, STREAM_SHUFFLING};

/// How the observed index set of each sample is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaModel {
    /// Keep each coordinate independently: probability `p` on the training
    /// split, `q` on validation and test.
    Bernoulli,
    /// Draw `m` coordinates uniformly with replacement and keep the
    /// distinct ones; matches the sampling model of the risk bound.
    WithReplacement { m: usize },
}

/// Generator configuration. Noise draws happen even at zero variance, so
/// sweeps over noise or missingness share the underlying codes.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub ambient_dim: usize,
    pub intrinsic_dim: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    /// Number of nonzero weight coordinates.
    pub sparsity: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// Per-entry observation probability on the training split.
    pub p_train: f64,
    /// Per-entry observation probability on validation and test splits.
    pub q_eval: f64,
    pub seed: u64,
    pub omega_model: OmegaModel,
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.intrinsic_dim == 0 || self.intrinsic_dim > self.ambient_dim {
            return Err(HarnessError::usage(format!(
                "need 1 <= d <= D, got d={} D={}",
                self.intrinsic_dim, self.ambient_dim
            )));
        }
        if self.sparsity == 0 || self.sparsity > self.intrinsic_dim {
            return Err(HarnessError::usage(format!(
                "need 1 <= sparsity <= d, got sparsity={} d={}",
                self.sparsity, self.intrinsic_dim
            )));
        }
        if self.n_train == 0 {
            return Err(HarnessError::usage("n must be positive"));
        }
        for (name, v) in [("p", self.p_train), ("q", self.q_eval)] {
            if !v.is_finite() || v <= 0.0 || v > 1.0 {
                return Err(HarnessError::usage(format!("{name} must lie in (0, 1]")));
            }
        }
        for (name, v) in [("sigma_x", self.sigma_x), ("sigma_y", self.sigma_y)] {
            if !v.is_finite() || v < 0.0 {
                return Err(HarnessError::usage(format!("{name} must be nonnegative")));
            }
        }
        if let OmegaModel::WithReplacement { m } = self.omega_model {
            if m == 0 {
                return Err(HarnessError::usage("m must be positive"));
            }
        }
        Ok(())
    }
}

/// The planted model behind a synthetic draw.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub u_star: DMatrix<f64>,
    pub w_star: DVector<f64>,
}

/// Per-entry Bernoulli mask: each coordinate observed with probability `p`.
/// Exactly `ambient_dim` uniforms are consumed regardless of `p`.
pub fn bernoulli_omega(rng: &mut ChaCha8Rng, ambient_dim: usize, p: f64) -> Vec<usize> {
    (0..ambient_dim)
        .filter(|_| rng.random_range(0.0..1.0) < p)
        .collect()
}

/// `m` uniform draws with replacement; the distinct coordinates observed.
pub fn with_replacement_omega(rng: &mut ChaCha8Rng, ambient_dim: usize, m: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..m).map(|_| rng.random_range(0..ambient_dim)).collect();
    indices.sort_unstable();
    indices.dedup();
    indices
}

/// Draws train/validation/test splits from the planted low-rank model
/// `x = U a + noise`, `y = aᵀ w + noise`, with missingness applied per the
/// configured model. Deterministic given the seed.
pub fn generate_synthetic(
    cfg: &SyntheticConfig,
) -> Result<(Dataset, Dataset, Dataset, GroundTruth)> {
    cfg.validate()?;
    let (big_d, d) = (cfg.ambient_dim, cfg.intrinsic_dim);
    let mut rng_data = substream(cfg.seed, STREAM_DATA);
    let mut rng_miss = substream(cfg.seed, STREAM_MISSINGNESS);
    let mut rng_support = substream(cfg.seed, STREAM_SHUFFLING);

    let mut raw = DMatrix::zeros(big_d, d);
    for k in 0..d {
        for j in 0..big_d {
            raw[(j, k)] = rng_data.sample(StandardNormal);
        }
    }
    let u_star = orthonormalize_polar(&raw)
        .map_err(HarnessError::Numerical)?
        .into_basis();

    let support = rand::seq::index::sample(&mut rng_support, d, cfg.sparsity);
    let mut w_star = DVector::zeros(d);
    for k in support.iter() {
        w_star[k] = rng_support.sample(StandardNormal);
    }

    let mut make_split = |count: usize, p: f64| -> Result<Dataset> {
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let mut alpha = DVector::zeros(d);
            for k in 0..d {
                alpha[k] = rng_data.sample(StandardNormal);
            }
            let mut x = &u_star * &alpha;
            for j in 0..big_d {
                let noise: f64 = rng_data.sample(StandardNormal);
                x[j] += cfg.sigma_x * noise;
            }
            let label_noise: f64 = rng_data.sample(StandardNormal);
            let y = w_star.dot(&alpha) + cfg.sigma_y * label_noise;
            let omega = match cfg.omega_model {
                OmegaModel::Bernoulli => bernoulli_omega(&mut rng_miss, big_d, p),
                OmegaModel::WithReplacement { m } => {
                    with_replacement_omega(&mut rng_miss, big_d, m)
                }
            };
            let values: Vec<f64> = omega.iter().map(|&j| x[j]).collect();
            samples.push(
                ObservedSample::new(omega, values, Some(y)).map_err(HarnessError::Numerical)?,
            );
        }
        Dataset::new(big_d, samples).map_err(HarnessError::Numerical)
    };

    let train = make_split(cfg.n_train, cfg.p_train)?;
    let val = make_split(cfg.n_val, cfg.q_eval)?;
    let test = make_split(cfg.n_test, cfg.q_eval)?;
    Ok((train, val, test, GroundTruth { u_star, w_star }))
}
