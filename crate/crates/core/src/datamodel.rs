//! Core data types shared by every solver: samples with missingness masks,
//! datasets, model parameter containers, and hyperparameters.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid_param, Error, Result};

/// One data point: the set of observed coordinate indices, the observed
/// values at those coordinates, and an optional label.
///
/// The index set is kept sorted and free of duplicates so that restriction
/// and densification iterate deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSample {
    /// Observed coordinate indices, strictly increasing.
    pub indices: Vec<usize>,
    /// Observed values, one per index.
    pub values: Vec<f64>,
    /// Regression target, absent for unlabeled data.
    pub label: Option<f64>,
}

impl ObservedSample {
    /// Builds a sample, sorting index/value pairs and dropping duplicate
    /// indices (first occurrence wins). Rejects length mismatches and
    /// non-finite values.
    pub fn new(indices: Vec<usize>, values: Vec<f64>, label: Option<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                what: "observed values",
                expected: indices.len(),
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid_param(
                "values",
                format!("non-finite value at position {pos}"),
            ));
        }
        if let Some(y) = label {
            if !y.is_finite() {
                return Err(invalid_param("label", "label must be finite"));
            }
        }
        let mut pairs: Vec<(usize, f64)> = indices.into_iter().zip(values).collect();
        pairs.sort_by_key(|&(i, _)| i);
        pairs.dedup_by_key(|&mut (i, _)| i);
        let (indices, values) = pairs.into_iter().unzip();
        Ok(Self {
            indices,
            values,
            label,
        })
    }

    /// Fully observed sample from a dense vector.
    pub fn dense(values: Vec<f64>, label: Option<f64>) -> Result<Self> {
        let indices = (0..values.len()).collect();
        Self::new(indices, values, label)
    }

    /// Number of observed coordinates, written m elsewhere.
    pub fn observed_count(&self) -> usize {
        self.indices.len()
    }

    /// Observed values as a column vector.
    pub fn values_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values)
    }
}

/// An ordered collection of samples living in a common ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Ambient dimension D; every index must be below it.
    pub ambient_dim: usize,
    pub samples: Vec<ObservedSample>,
}

impl Dataset {
    /// Builds a dataset, rejecting it if any sample violates an invariant.
    pub fn new(ambient_dim: usize, samples: Vec<ObservedSample>) -> Result<Self> {
        let ds = Self {
            ambient_dim,
            samples,
        };
        match validate_dataset(&ds).into_iter().next() {
            None => Ok(ds),
            Some(v) => Err(invalid_param("samples", v.to_string())),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Labels of all samples; fails on the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<f64>> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| s.label.ok_or(Error::UnlabeledSample { index: Some(i) }))
            .collect()
    }
}

/// One invariant violation found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub sample: usize,
    pub reason: ViolationReason,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationReason {
    IndicesNotSorted,
    IndexOutOfRange { index: usize, ambient_dim: usize },
    LengthMismatch { indices: usize, values: usize },
    NonFiniteValue { position: usize },
    NonFiniteLabel,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let Violation { sample, reason } = self;
        match reason {
            ViolationReason::IndicesNotSorted => {
                write!(f, "sample {sample}: indices not sorted")
            }
            ViolationReason::IndexOutOfRange { index, ambient_dim } => {
                write!(f, "sample {sample}: index {index} out of range (D={ambient_dim})")
            }
            ViolationReason::LengthMismatch { indices, values } => write!(
                f,
                "sample {sample}: {indices} indices but {values} values"
            ),
            ViolationReason::NonFiniteValue { position } => {
                write!(f, "sample {sample}: non-finite value at position {position}")
            }
            ViolationReason::NonFiniteLabel => write!(f, "sample {sample}: non-finite label"),
        }
    }
}

/// Checks every sample invariant and reports violations as data rather than
/// failing fast; an empty result means the dataset is well formed.
pub fn validate_dataset(ds: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, s) in ds.samples.iter().enumerate() {
        if s.indices.len() != s.values.len() {
            out.push(Violation {
                sample: i,
                reason: ViolationReason::LengthMismatch {
                    indices: s.indices.len(),
                    values: s.values.len(),
                },
            });
        }
        if s.indices.windows(2).any(|w| w[0] >= w[1]) {
            out.push(Violation {
                sample: i,
                reason: ViolationReason::IndicesNotSorted,
            });
        }
        for &idx in &s.indices {
            if idx >= ds.ambient_dim {
                out.push(Violation {
                    sample: i,
                    reason: ViolationReason::IndexOutOfRange {
                        index: idx,
                        ambient_dim: ds.ambient_dim,
                    },
                });
            }
        }
        for (pos, v) in s.values.iter().enumerate() {
            if !v.is_finite() {
                out.push(Violation {
                    sample: i,
                    reason: ViolationReason::NonFiniteValue { position: pos },
                });
            }
        }
        if matches!(s.label, Some(y) if !y.is_finite()) {
            out.push(Violation {
                sample: i,
                reason: ViolationReason::NonFiniteLabel,
            });
        }
    }
    out
}

/// Expands a sample to a dense length-D vector, placing `fill` at the
/// unobserved coordinates.
pub fn densify(sample: &ObservedSample, ambient_dim: usize, fill: f64) -> Result<DVector<f64>> {
    let mut out = DVector::from_element(ambient_dim, fill);
    for (&j, &v) in sample.indices.iter().zip(&sample.values) {
        if j >= ambient_dim {
            return Err(Error::DimensionMismatch {
                what: "sample index",
                expected: ambient_dim,
                got: j,
            });
        }
        out[j] = v;
    }
    Ok(out)
}

/// A D-by-d basis with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceEstimate {
    basis: DMatrix<f64>,
    intrinsic_dim: usize,
}

/// Frobenius tolerance for the orthonormality invariant.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

impl SubspaceEstimate {
    /// Wraps a basis after verifying the orthonormality invariant.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let d = basis.ncols();
        if d == 0 || d > basis.nrows() {
            return Err(invalid_param(
                "basis",
                format!("need 1 <= d <= D, got D={} d={}", basis.nrows(), d),
            ));
        }
        let deviation = orthonormality_deviation(&basis);
        if deviation > ORTHONORMALITY_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self {
            basis,
            intrinsic_dim: d,
        })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn into_basis(self) -> DMatrix<f64> {
        self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }
}

/// ‖UᵀU − I‖_F, the quantity bounded by [`ORTHONORMALITY_TOL`].
pub fn orthonormality_deviation(basis: &DMatrix<f64>) -> f64 {
    let d = basis.ncols();
    let mut gram = basis.tr_mul(basis);
    for i in 0..d {
        gram[(i, i)] -= 1.0;
    }
    gram.norm()
}

/// Regression coefficients in code space.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionWeights {
    pub w: DVector<f64>,
}

impl RegressionWeights {
    pub fn new(w: DVector<f64>) -> Result<Self> {
        if let Some(pos) = w.iter().position(|v| !v.is_finite()) {
            return Err(invalid_param(
                "w",
                format!("non-finite weight at position {pos}"),
            ));
        }
        Ok(Self { w })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            w: DVector::zeros(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }
}

/// The code vectors of a dataset, one d-dimensional column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeMatrix {
    columns: DMatrix<f64>,
}

impl CodeMatrix {
    pub fn zeros(code_dim: usize, n: usize) -> Self {
        Self {
            columns: DMatrix::zeros(code_dim, n),
        }
    }

    pub fn from_matrix(columns: DMatrix<f64>) -> Result<Self> {
        if columns.iter().any(|v| !v.is_finite()) {
            return Err(invalid_param("codes", "non-finite code entry"));
        }
        Ok(Self { columns })
    }

    pub fn code_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.ncols() == 0
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.columns.column(i).into_owned()
    }

    pub fn set_column(&mut self, i: usize, code: &DVector<f64>) {
        self.columns.set_column(i, code);
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.columns
    }
}

/// Weights, step sizes, and bookkeeping knobs shared by the trainers.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Weight on the observed-entry reconstruction term.
    pub lambda1: f64,
    /// l1 penalty on the regression weights.
    pub lambda2: f64,
    /// l2 penalty on the regression weights.
    pub lambda3: f64,
    /// Scale of the identity initialization of the per-row inverse matrices.
    pub delta_rls: f64,
    /// Predictor threshold parameter in [0, 1).
    pub gamma: f64,
    /// Base step size for the weight updates.
    pub rho: f64,
    /// Steps taken at constant step size before the 1/t decay starts.
    pub rho_constant_rounds: usize,
    /// Passes over the training set.
    pub max_passes: usize,
    /// Samples between validation checks; `None` selects max(1, n/10).
    pub validation_period: Option<usize>,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 1e-3,
            lambda3: 0.0,
            delta_rls: 1.0,
            gamma: 0.9,
            rho: 0.05,
            rho_constant_rounds: 1000,
            max_passes: 20,
            validation_period: None,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid_param(name, "must be finite and nonnegative"));
            }
        }
        if !self.delta_rls.is_finite() || self.delta_rls <= 0.0 {
            return Err(invalid_param("delta_rls", "must be positive"));
        }
        if !self.gamma.is_finite() || !(0.0..1.0).contains(&self.gamma) {
            return Err(invalid_param("gamma", "must lie in [0, 1)"));
        }
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return Err(invalid_param("rho", "must be positive"));
        }
        if self.validation_period == Some(0) {
            return Err(invalid_param("validation_period", "must be positive"));
        }
        Ok(())
    }
}
