//! Dataset and model files. Numbers are serialized with 17 significant
//! digits so save/load round-trips are lossless for f64.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use slrm_core::{Dataset, ObservedSample, RegressionWeights, SubspaceEstimate};

use crate::error::{HarnessError, Result};

/// 17 significant digits: enough to reconstruct any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// On-disk dataset layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// Header `label,f0,f1,...`; empty cells or `NaN` are missing entries.
    CsvDense,
    /// First line `#D=<int>`, then `label idx:val idx:val ...` per sample
    /// with 0-based indices. An unlabeled sample writes `NaN` as its label.
    SparseIndexed,
}

impl FromStr for DatasetFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv_dense" => Ok(DatasetFormat::CsvDense),
            "sparse_indexed" => Ok(DatasetFormat::SparseIndexed),
            other => Err(HarnessError::usage(format!(
                "unknown dataset format '{other}' (expected csv_dense or sparse_indexed)"
            ))),
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn is_missing_token(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("nan")
}

fn parse_value(path: &Path, line_no: usize, cell: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| HarnessError::data_at(path, line_no, format!("cannot parse value '{cell}'")))
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let text = read_to_string(path)?;
    match format {
        DatasetFormat::CsvDense => load_csv_dense(path, &text),
        DatasetFormat::SparseIndexed => load_sparse_indexed(path, &text),
    }
}

fn load_csv_dense(path: &Path, text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| HarnessError::data_at(path, 1, "empty file"))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"label") {
        return Err(HarnessError::data_at(
            path,
            1,
            "header must start with 'label'",
        ));
    }
    let ambient_dim = columns.len() - 1;
    for (k, name) in columns.iter().skip(1).enumerate() {
        if *name != format!("f{k}") {
            return Err(HarnessError::data_at(
                path,
                1,
                format!("feature column {} must be named f{k}", k + 1),
            ));
        }
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != ambient_dim + 1 {
            return Err(HarnessError::data_at(
                path,
                line_no,
                format!("expected {} cells, found {}", ambient_dim + 1, cells.len()),
            ));
        }
        let label = if is_missing_token(cells[0].trim()) {
            None
        } else {
            Some(parse_value(path, line_no, cells[0])?)
        };
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (j, cell) in cells.iter().skip(1).enumerate() {
            let cell = cell.trim();
            if is_missing_token(cell) {
                continue;
            }
            indices.push(j);
            values.push(parse_value(path, line_no, cell)?);
        }
        samples.push(
            ObservedSample::new(indices, values, label)
                .map_err(|e| HarnessError::data_at(path, line_no, e.to_string()))?,
        );
    }
    Dataset::new(ambient_dim, samples)
        .map_err(|e| HarnessError::data_at(path, 0, e.to_string()))
}

fn load_sparse_indexed(path: &Path, text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| HarnessError::data_at(path, 1, "empty file"))?;
    let ambient_dim: usize = first
        .strip_prefix("#D=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| HarnessError::data_at(path, 1, "first line must be '#D=<int>'"))?;
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_token = tokens.next().expect("non-empty line has a first token");
        let label = if is_missing_token(label_token) {
            None
        } else {
            Some(parse_value(path, line_no, label_token)?)
        };
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for token in tokens {
            let (idx_str, val_str) = token.split_once(':').ok_or_else(|| {
                HarnessError::data_at(path, line_no, format!("malformed pair '{token}'"))
            })?;
            let j: usize = idx_str.parse().map_err(|_| {
                HarnessError::data_at(path, line_no, format!("malformed index '{idx_str}'"))
            })?;
            if j >= ambient_dim {
                return Err(HarnessError::data_at(
                    path,
                    line_no,
                    format!("index {j} out of range (D={ambient_dim})"),
                ));
            }
            if indices.contains(&j) {
                return Err(HarnessError::data_at(
                    path,
                    line_no,
                    format!("duplicate index {j}"),
                ));
            }
            indices.push(j);
            values.push(parse_value(path, line_no, val_str)?);
        }
        samples.push(
            ObservedSample::new(indices, values, label)
                .map_err(|e| HarnessError::data_at(path, line_no, e.to_string()))?,
        );
    }
    Dataset::new(ambient_dim, samples)
        .map_err(|e| HarnessError::data_at(path, 0, e.to_string()))
}

pub fn save_dataset(path: &Path, ds: &Dataset, format: DatasetFormat) -> Result<()> {
    let mut out = String::new();
    match format {
        DatasetFormat::CsvDense => {
            out.push_str("label");
            for j in 0..ds.ambient_dim {
                let _ = write!(out, ",f{j}");
            }
            out.push('\n');
            for s in &ds.samples {
                match s.label {
                    Some(y) => out.push_str(&fmt_f64(y)),
                    None => {}
                }
                let mut cursor = 0usize;
                for j in 0..ds.ambient_dim {
                    out.push(',');
                    if cursor < s.indices.len() && s.indices[cursor] == j {
                        out.push_str(&fmt_f64(s.values[cursor]));
                        cursor += 1;
                    }
                }
                out.push('\n');
            }
        }
        DatasetFormat::SparseIndexed => {
            let _ = writeln!(out, "#D={}", ds.ambient_dim);
            for s in &ds.samples {
                match s.label {
                    Some(y) => out.push_str(&fmt_f64(y)),
                    None => out.push_str("NaN"),
                }
                for (&j, &v) in s.indices.iter().zip(&s.values) {
                    let _ = write!(out, " {j}:{}", fmt_f64(v));
                }
                out.push('\n');
            }
        }
    }
    write_string(path, &out)
}

/// A serialized regressor: basis, weights, and the indicator parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub subspace: SubspaceEstimate,
    pub weights: RegressionWeights,
    pub gamma: f64,
}

const MODEL_HEADER: &str = "slrm-model v1";

pub fn save_model(path: &Path, model: &ModelFile) -> Result<()> {
    let basis = model.subspace.basis();
    let (big_d, d) = (basis.nrows(), basis.ncols());
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_HEADER}");
    let _ = writeln!(out, "{big_d} {d} {}", fmt_f64(model.gamma));
    for j in 0..big_d {
        let row: Vec<String> = (0..d).map(|k| fmt_f64(basis[(j, k)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    let w_line: Vec<String> = model.weights.w.iter().map(|&v| fmt_f64(v)).collect();
    let _ = writeln!(out, "{}", w_line.join(" "));
    write_string(path, &out)
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| HarnessError::data_at(path, 1, "empty model file"))?;
    if header != MODEL_HEADER {
        return Err(HarnessError::data_at(
            path,
            1,
            format!("unsupported model header '{header}'"),
        ));
    }
    let (_, dims) = lines
        .next()
        .ok_or_else(|| HarnessError::data_at(path, 2, "missing dimension line"))?;
    let parts: Vec<&str> = dims.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(HarnessError::data_at(path, 2, "expected 'D d gamma'"));
    }
    let big_d: usize = parts[0]
        .parse()
        .map_err(|_| HarnessError::data_at(path, 2, "bad D"))?;
    let d: usize = parts[1]
        .parse()
        .map_err(|_| HarnessError::data_at(path, 2, "bad d"))?;
    let gamma = parse_value(path, 2, parts[2])?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(HarnessError::data_at(path, 2, "gamma must lie in [0, 1)"));
    }
    let mut basis = DMatrix::zeros(big_d, d);
    for j in 0..big_d {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| HarnessError::data_at(path, 3 + j, "missing basis row"))?;
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != d {
            return Err(HarnessError::data_at(
                path,
                idx + 1,
                format!("expected {d} entries, found {}", cells.len()),
            ));
        }
        for (k, cell) in cells.iter().enumerate() {
            basis[(j, k)] = parse_value(path, idx + 1, cell)?;
        }
    }
    let (w_idx, w_line) = lines
        .next()
        .ok_or_else(|| HarnessError::data_at(path, 3 + big_d, "missing weight line"))?;
    let cells: Vec<&str> = w_line.split_whitespace().collect();
    if cells.len() != d {
        return Err(HarnessError::data_at(
            path,
            w_idx + 1,
            format!("expected {d} weights, found {}", cells.len()),
        ));
    }
    let mut w = DVector::zeros(d);
    for (k, cell) in cells.iter().enumerate() {
        w[k] = parse_value(path, w_idx + 1, cell)?;
    }
    let subspace = SubspaceEstimate::new(basis)
        .map_err(|e| HarnessError::data_at(path, 3, e.to_string()))?;
    let weights =
        RegressionWeights::new(w).map_err(|e| HarnessError::data_at(path, w_idx + 1, e.to_string()))?;
    Ok(ModelFile {
        subspace,
        weights,
        gamma,
    })
}
