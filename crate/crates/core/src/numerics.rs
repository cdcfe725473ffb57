//! Small numerical kernels shared by the trainers: the l1 prox, polar
//! orthonormalization, symmetric solves with a pseudo-inverse fallback,
//! zero-filled SVD initialization, and operator norms.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::datamodel::{densify, Dataset, SubspaceEstimate};
use crate::error::{invalid_param, Error, Result};

/// Relative singular-value cutoff below which a direction is treated as
/// numerically absent.
pub const RANK_TOL: f64 = 1e-12;

/// Outcome of a symmetric linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: DVector<f64>,
    pub residual_norm: f64,
    pub used_pseudoinverse: bool,
}

/// Componentwise soft threshold: the proximal operator of `tau * ||.||_1`.
pub fn prox_l1(v: &DVector<f64>, tau: f64) -> Result<DVector<f64>> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(invalid_param("tau", "must be finite and nonnegative"));
    }
    Ok(v.map(|x| x.signum() * (x.abs() - tau).max(0.0)))
}

/// Replaces a full-column-rank matrix with the nearest matrix having
/// orthonormal columns (Frobenius norm), i.e. the orthogonal polar factor.
///
/// Computed from the thin SVD rather than by forming (MᵀM)^{-1/2}; the two
/// agree but the SVD route survives bad conditioning.
pub fn orthonormalize_polar(m: &DMatrix<f64>) -> Result<SubspaceEstimate> {
    let svd = SVD::new(m.clone(), true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > RANK_TOL * smax) {
        return Err(Error::RankDeficient {
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    SubspaceEstimate::new(u * v_t)
}

/// Top-d left singular vectors of the matrix whose columns are the samples
/// with zeros filled in at the unobserved coordinates.
pub fn svd_init(ds: &Dataset, d: usize) -> Result<SubspaceEstimate> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (big_d, n) = (ds.ambient_dim, ds.len());
    if d == 0 || d > big_d.min(n) {
        return Err(invalid_param(
            "d",
            format!("need 1 <= d <= min(D, n) = {}", big_d.min(n)),
        ));
    }
    let mut x0 = DMatrix::zeros(big_d, n);
    for (i, s) in ds.samples.iter().enumerate() {
        x0.set_column(i, &densify(s, big_d, 0.0)?);
    }
    let svd = SVD::new(x0, true, false);
    let sv = &svd.singular_values;
    let u = svd.u.expect("u requested");

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).expect("finite singular values"));
    let smax = sv[order[0]];
    let achievable = order
        .iter()
        .take_while(|&&i| sv[i] > RANK_TOL * smax && sv[i] > 0.0)
        .count();
    if d > achievable {
        return Err(Error::RankTooSmall {
            requested: d,
            achievable,
        });
    }
    let mut basis = DMatrix::zeros(big_d, d);
    for (k, &i) in order.iter().take(d).enumerate() {
        basis.set_column(k, &u.column(i));
    }
    SubspaceEstimate::new(basis)
}

/// Solves H z = g for symmetric H: direct Cholesky factorization when H is
/// positive definite, minimum-norm pseudo-inverse otherwise.
pub fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> Result<SolveReport> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(Error::DimensionMismatch {
            what: "solve matrix",
            expected: d,
            got: h.ncols(),
        });
    }
    if g.len() != d {
        return Err(Error::DimensionMismatch {
            what: "solve rhs",
            expected: d,
            got: g.len(),
        });
    }
    let scale = h.amax().max(1.0);
    let mut max_asym = 0.0f64;
    for i in 0..d {
        for j in (i + 1)..d {
            max_asym = max_asym.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    if max_asym > 1e-10 * scale {
        return Err(Error::NotSymmetric {
            max_asymmetry: max_asym,
        });
    }

    if let Some(chol) = nalgebra::Cholesky::new(h.clone()) {
        // A factorization that only just slipped past the positivity check
        // cannot be trusted to produce the minimum-norm solution; judge
        // definiteness by the pivot spread.
        let diag = chol.l_dirty();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for i in 0..d {
            min_pivot = min_pivot.min(diag[(i, i)]);
            max_pivot = max_pivot.max(diag[(i, i)]);
        }
        if min_pivot > 1e-6 * max_pivot {
            let solution = chol.solve(g);
            let residual_norm = (h * &solution - g).norm();
            if residual_norm <= 1e-8 * (1.0 + g.norm()) {
                return Ok(SolveReport {
                    solution,
                    residual_norm,
                    used_pseudoinverse: false,
                });
            }
        }
    }

    // Minimum-norm solution through the spectral pseudo-inverse.
    let eig = SymmetricEigen::new(h.clone());
    let lmax = eig.eigenvalues.amax();
    let coeffs = eig.eigenvectors.tr_mul(g);
    let filtered = DVector::from_fn(d, |i, _| {
        let lambda = eig.eigenvalues[i];
        if lambda.abs() > RANK_TOL * lmax {
            coeffs[i] / lambda
        } else {
            0.0
        }
    });
    let solution = &eig.eigenvectors * filtered;
    let residual_norm = (h * &solution - g).norm();
    Ok(SolveReport {
        solution,
        residual_norm,
        used_pseudoinverse: true,
    })
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SVD::new(m.clone(), false, false).singular_values.max()
}
