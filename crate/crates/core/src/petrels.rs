//! Streaming second-order subspace updates.
//!
//! Each ambient coordinate (row of the basis) carries its own running d-by-d
//! inverse of the accumulated code Gram matrix; a step touches exactly the
//! rows observed in the incoming sample, refreshing each inverse with a
//! rank-one identity and taking the corresponding recursive-least-squares
//! row update. The same step serves both the label-informed tracker and the
//! plain label-free variant; they differ only in how the caller computes the
//! code vector.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::datamodel::ObservedSample;
use crate::error::{invalid_param, Error, Result};

/// Steps between symmetry re-enforcement of the stored inverses.
const SYMMETRIZE_EVERY: u64 = 1000;

/// The per-row inverse matrices of the streaming subspace tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct RlsState {
    inverses: Vec<DMatrix<f64>>,
    ambient_dim: usize,
    intrinsic_dim: usize,
    step_count: u64,
}

impl RlsState {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn inverse(&self, row: usize) -> &DMatrix<f64> {
        &self.inverses[row]
    }

    /// Largest symmetry and negative-eigenvalue deviations over all rows;
    /// both should stay within 1e-8.
    pub fn invariant_deviations(&self) -> (f64, f64) {
        let mut max_asym = 0.0f64;
        let mut max_neg = 0.0f64;
        for inv in &self.inverses {
            let d = inv.nrows();
            for i in 0..d {
                for j in (i + 1)..d {
                    max_asym = max_asym.max((inv[(i, j)] - inv[(j, i)]).abs());
                }
            }
            let sym = (inv + inv.transpose()) * 0.5;
            let eig = SymmetricEigen::new(sym);
            max_neg = max_neg.max(-eig.eigenvalues.min());
        }
        (max_asym, max_neg.max(0.0))
    }
}

/// Initializes every per-row inverse to `delta * I_d`.
pub fn rls_init(ambient_dim: usize, intrinsic_dim: usize, delta: f64) -> Result<RlsState> {
    if intrinsic_dim == 0 || intrinsic_dim > ambient_dim {
        return Err(invalid_param(
            "intrinsic_dim",
            format!("need 1 <= d <= D, got D={ambient_dim} d={intrinsic_dim}"),
        ));
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(invalid_param("delta", "must be positive"));
    }
    let eye = DMatrix::<f64>::identity(intrinsic_dim, intrinsic_dim) * delta;
    Ok(RlsState {
        inverses: vec![eye; ambient_dim],
        ambient_dim,
        intrinsic_dim,
        step_count: 0,
    })
}

/// Replaces `inv = R†` with `(R + alpha alphaᵀ)†` through the rank-one
/// inverse identity, reading the pre-update inverse for the correction.
fn rank_one_inverse_update(inv: &mut DMatrix<f64>, alpha: &DVector<f64>) {
    let v = &*inv * alpha;
    let beta = 1.0 + alpha.dot(&v);
    inv.ger(-1.0 / beta, &v, &v, 1.0);
}

/// One streaming subspace update. Touches exactly the rows indexed by the
/// sample's observed set: each touched row first refreshes its inverse, then
/// moves by `(x_j - alphaᵀ u_j) * (R_j)†_new alpha`. Unobserved rows and
/// their inverses are left untouched.
pub fn modified_petrels_step(
    u: &mut DMatrix<f64>,
    sample: &ObservedSample,
    alpha: &DVector<f64>,
    state: &mut RlsState,
) -> Result<()> {
    step_impl(u, sample, alpha, state, false)
}

/// Same update with the per-row work distributed across threads. Rows are
/// independent, so the result is identical to the sequential step.
pub fn modified_petrels_step_parallel(
    u: &mut DMatrix<f64>,
    sample: &ObservedSample,
    alpha: &DVector<f64>,
    state: &mut RlsState,
) -> Result<()> {
    step_impl(u, sample, alpha, state, true)
}

fn step_impl(
    u: &mut DMatrix<f64>,
    sample: &ObservedSample,
    alpha: &DVector<f64>,
    state: &mut RlsState,
    parallel: bool,
) -> Result<()> {
    let (big_d, d) = (state.ambient_dim, state.intrinsic_dim);
    if u.nrows() != big_d || u.ncols() != d {
        return Err(Error::DimensionMismatch {
            what: "basis rows",
            expected: big_d,
            got: u.nrows(),
        });
    }
    if alpha.len() != d {
        return Err(Error::DimensionMismatch {
            what: "code vector",
            expected: d,
            got: alpha.len(),
        });
    }
    if alpha.iter().any(|x| !x.is_finite()) {
        return Err(invalid_param("alpha", "non-finite entry"));
    }
    if let Some(&j) = sample.indices.iter().find(|&&j| j >= big_d) {
        return Err(Error::DimensionMismatch {
            what: "sample index",
            expected: big_d,
            got: j,
        });
    }

    // Row j only reads row j, so updates may run in any order.
    let row_step = |j: usize, x_j: f64, inv: &mut DMatrix<f64>| -> (usize, DVector<f64>) {
        rank_one_inverse_update(inv, alpha);
        let gain = &*inv * alpha;
        let mut projected = 0.0;
        for k in 0..d {
            projected += alpha[k] * u[(j, k)];
        }
        (j, gain * (x_j - projected))
    };

    let deltas: Vec<(usize, DVector<f64>)> = if parallel {
        let mut observed: Vec<(usize, f64, &mut DMatrix<f64>)> = Vec::new();
        let mut it = sample.indices.iter().zip(&sample.values).peekable();
        for (j, inv) in state.inverses.iter_mut().enumerate() {
            if let Some(&(&jj, &v)) = it.peek() {
                if jj == j {
                    observed.push((j, v, inv));
                    it.next();
                }
            }
        }
        observed
            .into_par_iter()
            .map(|(j, x_j, inv)| row_step(j, x_j, inv))
            .collect()
    } else {
        sample
            .indices
            .iter()
            .zip(&sample.values)
            .map(|(&j, &x_j)| row_step(j, x_j, &mut state.inverses[j]))
            .collect()
    };

    for (j, delta) in deltas {
        for k in 0..d {
            u[(j, k)] += delta[k];
        }
    }

    state.step_count += 1;
    if state.step_count % SYMMETRIZE_EVERY == 0 {
        for inv in &mut state.inverses {
            let sym = (&*inv + inv.transpose()) * 0.5;
            *inv = sym;
        }
    }
    Ok(())
}

/// Replays a stream of rank-one updates for a single row and reports the
/// largest Frobenius gap between the recursively maintained inverse and the
/// inverse recomputed at every step by direct factorization of
/// `delta^{-1} I + sum of observed alpha alphaᵀ`.
pub fn rls_stream_equivalence_check(
    alphas: &[DVector<f64>],
    masks: &[bool],
    delta: f64,
) -> Result<f64> {
    if alphas.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if alphas.len() != masks.len() {
        return Err(Error::DimensionMismatch {
            what: "masks",
            expected: alphas.len(),
            got: masks.len(),
        });
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(invalid_param("delta", "must be positive"));
    }
    let d = alphas[0].len();
    if alphas.iter().any(|a| a.len() != d) {
        return Err(Error::DimensionMismatch {
            what: "code vector",
            expected: d,
            got: alphas.iter().map(|a| a.len()).find(|&l| l != d).unwrap(),
        });
    }

    let mut inv = DMatrix::<f64>::identity(d, d) * delta;
    let mut accum = DMatrix::<f64>::identity(d, d) / delta;
    let mut max_dev = 0.0f64;
    for (alpha, &observed) in alphas.iter().zip(masks) {
        if observed {
            rank_one_inverse_update(&mut inv, alpha);
            accum.ger(1.0, alpha, alpha, 1.0);
        }
        let direct = nalgebra::Cholesky::new(accum.clone())
            .ok_or_else(|| invalid_param("accum", "accumulated matrix not positive definite"))?
            .inverse();
        max_dev = max_dev.max((&inv - direct).norm());
    }
    Ok(max_dev)
}
