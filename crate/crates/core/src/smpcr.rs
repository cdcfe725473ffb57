//! The two-stage streaming baseline: an unsupervised subspace fit followed
//! by a stochastic l1-penalized regression on the learned codes.
//!
//! Stage 1 reuses the exact subspace step of the joint trainer but computes
//! its codes by plain least-squares projection, so the only difference
//! between the two methods is whether label information reaches the
//! subspace estimate. Stage 1 never reads labels.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datamodel::{
    CodeMatrix, Dataset, Hyperparams, RegressionWeights, SubspaceEstimate,
};
use crate::error::{Error, Result};
use crate::numerics::{orthonormalize_polar, svd_init};
use crate::petrels::{modified_petrels_step, modified_petrels_step_parallel, rls_init};
use crate::slrm::{project_code, step_size, validation_error, w_step};

/// Output of the two-stage baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct SmpcrModel {
    pub subspace: SubspaceEstimate,
    pub weights: RegressionWeights,
    pub gamma: f64,
}

/// Execution knobs for [`smpcr_train_with_options`].
#[derive(Debug, Clone, Copy)]
pub struct SmpcrOptions {
    /// Score the weights on the hold-out set once per pass and keep the
    /// best pair. Disabling returns the final-pass weights unconditionally.
    pub validation_gating: bool,
    pub parallel_rows: bool,
}

impl Default for SmpcrOptions {
    fn default() -> Self {
        Self {
            validation_gating: true,
            parallel_rows: false,
        }
    }
}

/// Unsupervised stage: zero-filled SVD initialization, then streaming
/// passes of least-squares code projection, the per-row subspace update,
/// and polar re-orthonormalization. Labels are never read.
pub fn smpcr_stage1(
    ds: &Dataset,
    d: usize,
    hp: &Hyperparams,
) -> Result<(SubspaceEstimate, CodeMatrix)> {
    stage1_impl(ds, d, hp, false)
}

fn stage1_impl(
    ds: &Dataset,
    d: usize,
    hp: &Hyperparams,
    parallel_rows: bool,
) -> Result<(SubspaceEstimate, CodeMatrix)> {
    hp.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let subspace = svd_init(ds, d)?;
    let n = ds.len();
    let mut codes = CodeMatrix::zeros(d, n);
    let mut u = subspace.into_basis();
    for (i, sample) in ds.samples.iter().enumerate() {
        codes.set_column(i, &project_code(&u, sample)?);
    }
    let mut rls = rls_init(ds.ambient_dim, d, hp.delta_rls)?;
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    for _pass in 0..hp.max_passes {
        for (i, sample) in ds.samples.iter().enumerate() {
            let alpha = project_code(&u, sample)?;
            codes.set_column(i, &alpha);
            if parallel_rows {
                modified_petrels_step_parallel(&mut u, sample, &alpha, &mut rls)?;
            } else {
                modified_petrels_step(&mut u, sample, &alpha, &mut rls)?;
            }
            match orthonormalize_polar(&u) {
                Ok(sub) => u = sub.into_basis(),
                Err(Error::RankDeficient { .. }) => {
                    u = crate::slrm::complete_deficient_basis(&u, &mut rng);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok((SubspaceEstimate::new(u)?, codes))
}

/// Regression stage: stochastic proximal-gradient passes over
/// `(1/n)||Y - Aᵀw||² + lambda2 ||w||_1`, starting from zero weights. The
/// ridge term of the joint trainer does not apply here.
pub fn smpcr_stage2(
    codes: &CodeMatrix,
    labels: &[f64],
    hp: &Hyperparams,
) -> Result<RegressionWeights> {
    let w = stage2_passes(codes, labels, hp, |_| Ok(()))?;
    RegressionWeights::new(w)
}

fn stage2_passes(
    codes: &CodeMatrix,
    labels: &[f64],
    hp: &Hyperparams,
    mut after_pass: impl FnMut(&DVector<f64>) -> Result<()>,
) -> Result<DVector<f64>> {
    hp.validate()?;
    if codes.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if codes.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: codes.len(),
            got: labels.len(),
        });
    }
    let mut w = DVector::zeros(codes.code_dim());
    let mut t: u64 = 0;
    for _pass in 0..hp.max_passes {
        for i in 0..codes.len() {
            t += 1;
            let eta = step_size(t, hp.rho, hp.rho_constant_rounds);
            if eta > 0.0 {
                w = w_step(&w, &codes.column(i), labels[i], eta, hp.lambda2, 0.0);
            }
        }
        after_pass(&w)?;
    }
    Ok(w)
}

/// Composes the two stages with default options.
pub fn smpcr_train(
    ds_train: &Dataset,
    ds_val: &Dataset,
    d: usize,
    hp: &Hyperparams,
) -> Result<SmpcrModel> {
    smpcr_train_with_options(ds_train, ds_val, d, hp, SmpcrOptions::default())
}

/// Runs stage 1 blind, then stage 2 with (by default) one hold-out check
/// per pass, keeping the weights that score best against the fixed stage-1
/// basis. Gating lives entirely in stage 2 so stage 1 stays label-blind.
pub fn smpcr_train_with_options(
    ds_train: &Dataset,
    ds_val: &Dataset,
    d: usize,
    hp: &Hyperparams,
    options: SmpcrOptions,
) -> Result<SmpcrModel> {
    let (subspace, codes) = stage1_impl(ds_train, d, hp, options.parallel_rows)?;
    let labels = ds_train.labels()?;
    let final_w = if options.validation_gating {
        let mut best: Option<(f64, DVector<f64>)> = None;
        let last = stage2_passes(&codes, &labels, hp, |w| {
            let err = validation_error(subspace.basis(), w, hp.gamma, ds_val)?;
            if best.as_ref().is_none_or(|(b, _)| err < *b) {
                best = Some((err, w.clone()));
            }
            Ok(())
        })?;
        best.map(|(_, w)| w).unwrap_or(last)
    } else {
        stage2_passes(&codes, &labels, hp, |_| Ok(()))?
    };
    Ok(SmpcrModel {
        subspace,
        weights: RegressionWeights::new(final_w)?,
        gamma: hp.gamma,
    })
}
