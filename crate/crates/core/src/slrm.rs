//! The joint trainer: per-sample closed-form code updates, streaming
//! second-order subspace updates, polar re-orthonormalization, stochastic
//! proximal-gradient weight updates, and validation-gated model selection.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, SVD};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datamodel::{
    orthonormality_deviation, CodeMatrix, Dataset, Hyperparams, ObservedSample,
    RegressionWeights, SubspaceEstimate,
};
use crate::error::{invalid_param, Error, Result};
use crate::numerics::{operator_norm, orthonormalize_polar, solve_spd, svd_init, RANK_TOL};
use crate::petrels::{
    modified_petrels_step, modified_petrels_step_parallel, rls_init, RlsState,
};
use crate::predictor::test_mse;

/// A trained regressor: basis, weights, the indicator parameter it was
/// validated with, and the hold-out error that selected it.
#[derive(Debug, Clone, PartialEq)]
pub struct SlrmModel {
    pub subspace: SubspaceEstimate,
    pub weights: RegressionWeights,
    pub gamma: f64,
    pub best_validation_error: f64,
}

/// Mutable trainer state threaded through the per-sample loop.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub current_u: DMatrix<f64>,
    pub current_w: DVector<f64>,
    pub codes: CodeMatrix,
    pub rls: RlsState,
    pub step_count: u64,
    pub best: SlrmModel,
}

/// Execution knobs that do not change what is learned.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrainOptions {
    /// Distribute the per-row subspace update across threads.
    pub parallel_rows: bool,
    /// Track the orthonormality deviation after every re-orthonormalization.
    pub collect_diagnostics: bool,
    /// Record the wall time of every per-sample update (validation excluded).
    pub collect_timing: bool,
}

/// Training outcome plus run diagnostics.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: SlrmModel,
    /// Largest ‖UᵀU − I‖_F seen after any orthonormalization step; zero
    /// when diagnostics were not collected.
    pub max_orthonormality_error: f64,
    /// Times the subspace update produced a rank-deficient basis that had to
    /// be completed with fresh random directions.
    pub repair_events: usize,
    /// Times a degenerate code solve fell back to the minimum-norm solution.
    pub pinv_fallbacks: usize,
    /// Best hold-out error after each validation, in order.
    pub checkpoint_best_errors: Vec<f64>,
    /// Per-sample update durations when timing was requested.
    pub per_sample_seconds: Vec<f64>,
}

/// Minimizes `lambda1 ||x_Ω - U_Ω a||² + (y - wᵀa)²` over the code `a` by
/// solving the normal equations `(lambda1 U_Ωᵀ U_Ω + w wᵀ) a = lambda1 U_Ωᵀ
/// x_Ω + y w`; degenerate systems yield the minimum-norm solution.
pub fn solve_alpha(
    u: &DMatrix<f64>,
    w: &DVector<f64>,
    sample: &ObservedSample,
    lambda1: f64,
) -> Result<DVector<f64>> {
    solve_alpha_report(u, w, sample, lambda1).map(|(alpha, _)| alpha)
}

fn solve_alpha_report(
    u: &DMatrix<f64>,
    w: &DVector<f64>,
    sample: &ObservedSample,
    lambda1: f64,
) -> Result<(DVector<f64>, bool)> {
    if !lambda1.is_finite() || lambda1 < 0.0 {
        return Err(invalid_param("lambda1", "must be finite and nonnegative"));
    }
    let y = sample
        .label
        .ok_or(Error::UnlabeledSample { index: None })?;
    let d = u.ncols();
    if w.len() != d {
        return Err(Error::DimensionMismatch {
            what: "weights",
            expected: d,
            got: w.len(),
        });
    }
    let (gram, proj) = restricted_normal_parts(u, sample)?;
    let mut h = gram * lambda1;
    h.ger(1.0, w, w, 1.0);
    let g = proj * lambda1 + w * y;
    let report = solve_spd(&h, &g)?;
    debug_assert!(
        {
            let grad = &h * &report.solution - &g;
            grad.norm() <= 1e-8 * (1.0 + g.norm())
        },
        "code solve left a non-stationary point"
    );
    Ok((report.solution, report.used_pseudoinverse))
}

/// Least-squares code of a sample against the restricted basis, with the
/// minimum-norm convention on degeneracy. This is the label-free special
/// case of [`solve_alpha`] (weights zero, unit reconstruction weight) used
/// by the unsupervised tracker and the initializers.
pub fn project_code(u: &DMatrix<f64>, sample: &ObservedSample) -> Result<DVector<f64>> {
    let (gram, proj) = restricted_normal_parts(u, sample)?;
    Ok(solve_spd(&gram, &proj)?.solution)
}

/// `(U_Ωᵀ U_Ω, U_Ωᵀ x_Ω)` for one sample.
fn restricted_normal_parts(
    u: &DMatrix<f64>,
    sample: &ObservedSample,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (big_d, d) = (u.nrows(), u.ncols());
    if let Some(&j) = sample.indices.iter().find(|&&j| j >= big_d) {
        return Err(Error::DimensionMismatch {
            what: "sample index",
            expected: big_d,
            got: j,
        });
    }
    let m = sample.observed_count();
    let mut u_omega = DMatrix::zeros(m, d);
    for (row, &j) in sample.indices.iter().enumerate() {
        for k in 0..d {
            u_omega[(row, k)] = u[(j, k)];
        }
    }
    let x_omega = sample.values_vector();
    Ok((u_omega.tr_mul(&u_omega), u_omega.tr_mul(&x_omega)))
}

/// One stochastic proximal-gradient update of the weights:
/// `prox_{eta lambda2}[w - eta (2 (a (aᵀ w) - y a) + lambda3 w)]`.
pub fn w_step(
    w: &DVector<f64>,
    alpha: &DVector<f64>,
    y: f64,
    eta: f64,
    lambda2: f64,
    lambda3: f64,
) -> DVector<f64> {
    debug_assert!(eta > 0.0, "step size must be positive");
    let inner = alpha.dot(w);
    let stepped = w - (alpha * (2.0 * (inner - y)) + w * lambda3) * eta;
    let tau = (eta * lambda2).max(0.0);
    stepped.map(|x| x.signum() * (x.abs() - tau).max(0.0))
}

/// Step-size schedule: constant `rho` for the first `constant_rounds` steps,
/// then `rho * constant_rounds / t`, continuous at the switch.
pub fn step_size(t: u64, rho: f64, constant_rounds: usize) -> f64 {
    let cr = constant_rounds as u64;
    if t <= cr {
        rho
    } else {
        rho * cr as f64 / t as f64
    }
}

/// Hold-out mean squared error of the thresholded projection predictor.
pub fn validation_error(
    u: &DMatrix<f64>,
    w: &DVector<f64>,
    gamma: f64,
    holdout: &Dataset,
) -> Result<f64> {
    let subspace = SubspaceEstimate::new(u.clone())?;
    let weights = RegressionWeights::new(w.clone())?;
    test_mse(&subspace, &weights, gamma, holdout)
}

/// Builds the starting state: zero-filled SVD basis, least-squares codes
/// against it, an l1-regularized batch fit for the initial weights, and
/// identity-scaled inverse matrices for the tracker.
pub fn initialize(ds_train: &Dataset, d: usize, hp: &Hyperparams) -> Result<TrainState> {
    hp.validate()?;
    if ds_train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let labels = ds_train.labels()?;
    let subspace = svd_init(ds_train, d)?;
    let n = ds_train.len();
    let mut codes = CodeMatrix::zeros(d, n);
    for (i, sample) in ds_train.samples.iter().enumerate() {
        let alpha = project_code(subspace.basis(), sample)?;
        codes.set_column(i, &alpha);
    }
    let w0 = batch_lasso(codes.as_matrix(), &labels, hp.lambda2);
    let rls = rls_init(ds_train.ambient_dim, d, hp.delta_rls)?;
    let best = SlrmModel {
        subspace: subspace.clone(),
        weights: RegressionWeights::new(w0.clone())?,
        gamma: hp.gamma,
        best_validation_error: f64::INFINITY,
    };
    Ok(TrainState {
        current_u: subspace.into_basis(),
        current_w: w0,
        codes,
        rls,
        step_count: 0,
        best,
    })
}

/// Batch proximal-gradient fit of `(1/n)||y - Aᵀw||² + lambda2 ||w||_1`,
/// iterated to a 1e-8 relative objective change or 10^4 iterations.
fn batch_lasso(codes: &DMatrix<f64>, labels: &[f64], lambda2: f64) -> DVector<f64> {
    let (d, n) = (codes.nrows(), codes.ncols());
    let sigma = operator_norm(codes);
    if sigma <= f64::MIN_POSITIVE {
        return DVector::zeros(d);
    }
    let y = DVector::from_column_slice(labels);
    let nf = n as f64;
    let lipschitz = 2.0 * sigma * sigma / nf;
    let step = 1.0 / lipschitz;
    let tau = lambda2 * step;
    let objective = |w: &DVector<f64>| -> f64 {
        let r = codes.tr_mul(w) - &y;
        r.norm_squared() / nf + lambda2 * w.lp_norm(1)
    };
    let mut w = DVector::zeros(d);
    let mut prev = objective(&w);
    for _ in 0..10_000 {
        let residual = codes.tr_mul(&w) - &y;
        let grad = codes * residual * (2.0 / nf);
        w = (&w - grad * step).map(|x| x.signum() * (x.abs() - tau).max(0.0));
        let obj = objective(&w);
        if (prev - obj).abs() <= 1e-8 * prev.max(f64::MIN_POSITIVE) {
            break;
        }
        prev = obj;
    }
    w
}

/// Trains with default execution options and returns the selected model.
pub fn train(
    ds_train: &Dataset,
    ds_val: &Dataset,
    d: usize,
    hp: &Hyperparams,
) -> Result<SlrmModel> {
    train_with_options(ds_train, ds_val, d, hp, TrainOptions::default()).map(|r| r.model)
}

/// Full training loop. Per sample: code solve, streaming subspace update,
/// polar re-orthonormalization, and a proximal weight step; every
/// `validation_period` samples the current pair is scored on the hold-out
/// set and kept if it strictly improves. The initialization is scored
/// before the first update, so the returned model is always validated.
pub fn train_with_options(
    ds_train: &Dataset,
    ds_val: &Dataset,
    d: usize,
    hp: &Hyperparams,
    options: TrainOptions,
) -> Result<TrainReport> {
    let mut state = initialize(ds_train, d, hp)?;
    let n = ds_train.len();
    let period = hp.validation_period.unwrap_or((n / 10).max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut report = TrainReport {
        model: state.best.clone(),
        max_orthonormality_error: 0.0,
        repair_events: 0,
        pinv_fallbacks: 0,
        checkpoint_best_errors: Vec::new(),
        per_sample_seconds: Vec::new(),
    };

    let validate = |state: &mut TrainState, report: &mut TrainReport| -> Result<()> {
        let err = validation_error(&state.current_u, &state.current_w, hp.gamma, ds_val)?;
        if err < state.best.best_validation_error {
            state.best = SlrmModel {
                subspace: SubspaceEstimate::new(state.current_u.clone())?,
                weights: RegressionWeights::new(state.current_w.clone())?,
                gamma: hp.gamma,
                best_validation_error: err,
            };
        }
        report.checkpoint_best_errors.push(state.best.best_validation_error);
        Ok(())
    };

    validate(&mut state, &mut report)?;

    for _pass in 0..hp.max_passes {
        for (i, sample) in ds_train.samples.iter().enumerate() {
            let started = options.collect_timing.then(Instant::now);
            state.step_count += 1;
            let y = sample
                .label
                .ok_or(Error::UnlabeledSample { index: Some(i) })?;

            let (alpha, used_pinv) =
                solve_alpha_report(&state.current_u, &state.current_w, sample, hp.lambda1)?;
            if used_pinv {
                report.pinv_fallbacks += 1;
            }
            state.codes.set_column(i, &alpha);

            if options.parallel_rows {
                modified_petrels_step_parallel(
                    &mut state.current_u,
                    sample,
                    &alpha,
                    &mut state.rls,
                )?;
            } else {
                modified_petrels_step(&mut state.current_u, sample, &alpha, &mut state.rls)?;
            }

            match orthonormalize_polar(&state.current_u) {
                Ok(sub) => state.current_u = sub.into_basis(),
                Err(Error::RankDeficient { .. }) => {
                    state.current_u = complete_deficient_basis(&state.current_u, &mut rng);
                    report.repair_events += 1;
                }
                Err(e) => return Err(e),
            }
            if options.collect_diagnostics {
                report.max_orthonormality_error = report
                    .max_orthonormality_error
                    .max(orthonormality_deviation(&state.current_u));
            }
            debug_assert!(
                orthonormality_deviation(&state.current_u) <= 1e-8,
                "basis drifted from orthonormality"
            );

            let eta = step_size(state.step_count, hp.rho, hp.rho_constant_rounds);
            state.current_w = w_step(&state.current_w, &alpha, y, eta, hp.lambda2, hp.lambda3);

            if let Some(t0) = started {
                report.per_sample_seconds.push(t0.elapsed().as_secs_f64());
            }

            if state.step_count % period as u64 == 0 {
                validate(&mut state, &mut report)?;
            }
        }
    }

    if state.step_count > 0 && state.step_count % period as u64 != 0 {
        validate(&mut state, &mut report)?;
    }
    report.model = state.best;
    Ok(report)
}

/// Rebuilds an orthonormal basis from a rank-deficient update: keeps the
/// numerically independent singular directions and completes the remaining
/// columns with random directions orthogonalized against everything kept.
pub(crate) fn complete_deficient_basis(m: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (big_d, d) = (m.nrows(), m.ncols());
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("u requested");
    let sv = &svd.singular_values;
    let smax = sv.max();
    let mut kept: Vec<DVector<f64>> = (0..sv.len())
        .filter(|&i| sv[i] > RANK_TOL * smax && sv[i] > 0.0)
        .map(|i| u.column(i).into_owned())
        .collect();
    kept.truncate(d);
    while kept.len() < d {
        let mut v = DVector::from_fn(big_d, |_, _| rng.random_range(-1.0..1.0));
        for q in &kept {
            let c = q.dot(&v);
            v -= q * c;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            kept.push(v / norm);
        }
    }
    DMatrix::from_columns(&kept)
}
