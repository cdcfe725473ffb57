//! Streaming sparse linear regression when the design matrix has missing
//! entries.
//!
//! The library models data as lying near a low-dimensional subspace with a
//! sparse regressor acting on the subspace coordinates, and provides:
//!
//! - [`slrm`]: a joint trainer that alternates per-sample code solves,
//!   streaming second-order subspace updates, polar re-orthonormalization,
//!   and stochastic proximal weight updates, with validation-gated model
//!   selection;
//! - [`smpcr`]: the two-stage baseline that first fits the subspace without
//!   labels and then runs a stochastic l1-penalized regression on the codes;
//! - [`petrels`]: the shared per-row recursive-least-squares subspace step;
//! - [`predictor`]: the thresholded projection regressor both methods use;
//! - [`theory`]: evaluators for the associated risk and complexity bounds;
//! - [`datamodel`] and [`numerics`]: the common types and kernels.

pub mod datamodel;
pub mod error;
pub mod numerics;
pub mod petrels;
pub mod predictor;
pub mod slrm;
pub mod smpcr;
pub mod theory;

pub use datamodel::{
    densify, validate_dataset, CodeMatrix, Dataset, Hyperparams, ObservedSample,
    RegressionWeights, SubspaceEstimate, Violation,
};
pub use error::{Error, Result};
pub use numerics::{operator_norm, orthonormalize_polar, prox_l1, solve_spd, svd_init};
pub use petrels::{
    modified_petrels_step, modified_petrels_step_parallel, rls_init,
    rls_stream_equivalence_check, RlsState,
};
pub use predictor::{predict, test_mse, Prediction};
pub use slrm::{
    initialize, project_code, solve_alpha, step_size, train, train_with_options,
    validation_error, w_step, SlrmModel, TrainOptions, TrainReport, TrainState,
};
pub use smpcr::{smpcr_stage1, smpcr_stage2, smpcr_train, smpcr_train_with_options, SmpcrModel, SmpcrOptions};
pub use theory::{
    coherence, gamma_lower_bound, loss_range_constant, rademacher_bound, theorem1_rhs,
    BoundParams,
};
