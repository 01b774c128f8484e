//! Datasets, CSV ingestion and covariate rescaling.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("column `{0}` not present in header")]
    MissingColumn(String),
    #[error("row {row}: treatment value `{value}` is not 0 or 1")]
    NonBinaryTreatment { row: usize, value: String },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("dataset shape: {0}")]
    Shape(String),
    #[error("dataset has no {0} units")]
    EmptyGroup(&'static str),
    #[error("dataset has no outcome column")]
    MissingOutcome,
    #[error("covariate {index} is constant (min = max = {value})")]
    DegenerateDimension { index: usize, value: f64 },
    #[error("rescale margin {0} outside [0, 0.1]")]
    InvalidMargin(f64),
    #[error("covariate dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Observed data `(X_i, Z_i, Y_i)` with covariates stored row-major.
///
/// Immutable once built. The outcome vector may be absent, which is how
/// unlabeled control samples are represented.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    covariates: Vec<f64>,
    treatment: Vec<u8>,
    outcome: Option<Vec<f64>>,
    covariate_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        covariates: Vec<f64>,
        dim: usize,
        treatment: Vec<u8>,
        outcome: Option<Vec<f64>>,
        covariate_names: Vec<String>,
    ) -> Result<Self, DataError> {
        if dim == 0 {
            return Err(DataError::Shape("covariate dimension must be at least 1".into()));
        }
        if covariates.len() % dim != 0 {
            return Err(DataError::Shape(format!(
                "{} covariate values do not divide into rows of {dim}",
                covariates.len()
            )));
        }
        let n = covariates.len() / dim;
        if n < 2 {
            return Err(DataError::Shape(format!("need at least 2 rows, found {n}")));
        }
        if treatment.len() != n {
            return Err(DataError::Shape(format!("treatment has {} entries for {n} rows", treatment.len())));
        }
        if let Some(y) = &outcome {
            if y.len() != n {
                return Err(DataError::Shape(format!("outcome has {} entries for {n} rows", y.len())));
            }
            if let Some(row) = y.iter().position(|v| !v.is_finite()) {
                return Err(DataError::Shape(format!("outcome at row {} is not finite", row + 1)));
            }
        }
        if covariate_names.len() != dim {
            return Err(DataError::Shape(format!(
                "{} covariate names for dimension {dim}",
                covariate_names.len()
            )));
        }
        if let Some(pos) = covariates.iter().position(|v| !v.is_finite()) {
            return Err(DataError::Shape(format!(
                "covariate at row {}, column {} is not finite",
                pos / dim + 1,
                pos % dim + 1
            )));
        }
        if let Some(row) = treatment.iter().position(|&z| z > 1) {
            return Err(DataError::NonBinaryTreatment { row: row + 1, value: treatment[row].to_string() });
        }
        Ok(Self { dim, covariates, treatment, outcome, covariate_names })
    }

    /// Builds a dataset with default covariate names `X1..Xd`.
    pub fn from_parts(
        covariates: Vec<f64>,
        dim: usize,
        treatment: Vec<u8>,
        outcome: Option<Vec<f64>>,
    ) -> Result<Self, DataError> {
        let names = (1..=dim).map(|k| format!("X{k}")).collect();
        Self::new(covariates, dim, treatment, outcome, names)
    }

    pub fn len(&self) -> usize {
        self.treatment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.treatment.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.dim..(i + 1) * self.dim]
    }

    pub fn treatment(&self) -> &[u8] {
        &self.treatment
    }

    pub fn is_treated(&self, i: usize) -> bool {
        self.treatment[i] == 1
    }

    pub fn outcome(&self) -> Option<&[f64]> {
        self.outcome.as_deref()
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn n_treated(&self) -> usize {
        self.treatment.iter().filter(|&&z| z == 1).count()
    }

    pub fn n_control(&self) -> usize {
        self.len() - self.n_treated()
    }

    /// Row-major covariates of the rows with the given treatment value.
    pub fn group_covariates(&self, treated: bool) -> Vec<f64> {
        let want = u8::from(treated);
        let mut out = Vec::with_capacity(self.covariates.len());
        for (i, &z) in self.treatment.iter().enumerate() {
            if z == want {
                out.extend_from_slice(self.row(i));
            }
        }
        out
    }

    /// Same treatment and outcome with new covariates of the same shape.
    pub fn with_covariates(&self, covariates: Vec<f64>) -> Result<Self, DataError> {
        if covariates.len() != self.covariates.len() {
            return Err(DataError::DimensionMismatch {
                expected: self.covariates.len(),
                found: covariates.len(),
            });
        }
        Self::new(covariates, self.dim, self.treatment.clone(), self.outcome.clone(), self.covariate_names.clone())
    }

    /// Same covariates and treatment with a different outcome vector.
    pub fn with_outcome(&self, outcome: Vec<f64>) -> Result<Self, DataError> {
        Self::new(self.covariates.clone(), self.dim, self.treatment.clone(), Some(outcome), self.covariate_names.clone())
    }

    /// Checks the extra invariants needed to estimate: outcomes present and
    /// both groups non-empty.
    pub fn check_estimable(&self) -> Result<&[f64], DataError> {
        let y = self.outcome().ok_or(DataError::MissingOutcome)?;
        if self.n_treated() == 0 {
            return Err(DataError::EmptyGroup("treated"));
        }
        if self.n_control() == 0 {
            return Err(DataError::EmptyGroup("control"));
        }
        Ok(y)
    }

    /// Writes the dataset as CSV: covariate columns, then treatment, then
    /// outcome (if present). Values use the shortest representation that
    /// parses back to the identical `f64`.
    pub fn write_csv(&self, path: impl AsRef<Path>, treatment_col: &str, outcome_col: &str) -> Result<(), DataError> {
        let mut w = std::io::BufWriter::new(File::create(path)?);
        self.write_csv_to(&mut w, treatment_col, outcome_col)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, w: &mut W, treatment_col: &str, outcome_col: &str) -> Result<(), DataError> {
        let mut header: Vec<&str> = self.covariate_names.iter().map(String::as_str).collect();
        header.push(treatment_col);
        if self.outcome.is_some() {
            header.push(outcome_col);
        }
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            let mut line = String::new();
            for v in self.row(i) {
                line.push_str(&format!("{v},"));
            }
            line.push_str(&self.treatment[i].to_string());
            if let Some(y) = &self.outcome {
                line.push_str(&format!(",{}", y[i]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Reads a dataset from a headered, comma-separated file.
///
/// Rows keep file order. Row numbers in errors are 1-based data rows (the
/// header is not counted).
pub fn load_csv(
    path: impl AsRef<Path>,
    treatment_col: &str,
    outcome_col: Option<&str>,
    covariate_cols: &[&str],
) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    let file = File::open(path)?;
    read_csv(file, treatment_col, outcome_col, covariate_cols)
}

pub fn read_csv<R: std::io::Read>(
    reader: R,
    treatment_col: &str,
    outcome_col: Option<&str>,
    covariate_cols: &[&str],
) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let z_idx = find(treatment_col)?;
    let y_idx = outcome_col.map(find).transpose()?;
    let x_idx: Vec<usize> = covariate_cols.iter().map(|c| find(c)).collect::<Result<_, _>>()?;
    if x_idx.is_empty() {
        return Err(DataError::Shape("no covariate columns selected".into()));
    }

    let mut covariates = Vec::new();
    let mut treatment = Vec::new();
    let mut outcome = y_idx.map(|_| Vec::new());
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(DataError::Ragged { row, expected: headers.len(), found: record.len() });
        }
        let number = |idx: usize, column: &str| -> Result<f64, DataError> {
            let raw = record[idx].trim();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DataError::NonNumeric { row, column: column.to_string(), value: raw.to_string() })
        };
        for (&idx, name) in x_idx.iter().zip(covariate_cols) {
            covariates.push(number(idx, name)?);
        }
        let z_raw = record[z_idx].trim();
        let z = match z_raw.parse::<f64>() {
            Ok(0.0) => 0,
            Ok(1.0) => 1,
            _ => return Err(DataError::NonBinaryTreatment { row, value: z_raw.to_string() }),
        };
        treatment.push(z);
        if let (Some(idx), Some(ys), Some(name)) = (y_idx, outcome.as_mut(), outcome_col) {
            ys.push(number(idx, name)?);
        }
    }
    let names = covariate_cols.iter().map(|s| s.to_string()).collect();
    Dataset::new(covariates, x_idx.len(), treatment, outcome, names)
}

/// Per-dimension affine map sending `[lo_k, hi_k]` onto `[ε, 1-ε]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleMap {
    lo: Vec<f64>,
    hi: Vec<f64>,
    margin: f64,
}

impl RescaleMap {
    pub const DEFAULT_MARGIN: f64 = 0.01;

    /// Fits the map on the union of control and treated covariates.
    pub fn fit(control: &[f64], treated: &[f64], dim: usize, margin: f64) -> Result<Self, DataError> {
        if !(0.0..=0.1).contains(&margin) {
            return Err(DataError::InvalidMargin(margin));
        }
        if dim == 0 || control.len() % dim != 0 || treated.len() % dim != 0 {
            return Err(DataError::Shape("rescale input does not match dimension".into()));
        }
        if control.is_empty() {
            return Err(DataError::EmptyGroup("control"));
        }
        if treated.is_empty() {
            return Err(DataError::EmptyGroup("treated"));
        }
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for row in control.chunks_exact(dim).chain(treated.chunks_exact(dim)) {
            for k in 0..dim {
                lo[k] = lo[k].min(row[k]);
                hi[k] = hi[k].max(row[k]);
            }
        }
        for k in 0..dim {
            if hi[k] <= lo[k] {
                return Err(DataError::DegenerateDimension { index: k, value: lo[k] });
            }
        }
        Ok(Self { lo, hi, margin })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    #[inline]
    pub fn apply_coord(&self, k: usize, x: f64) -> f64 {
        let span = 1.0 - 2.0 * self.margin;
        self.margin + span * (x - self.lo[k]) / (self.hi[k] - self.lo[k])
    }

    #[inline]
    pub fn invert_coord(&self, k: usize, u: f64) -> f64 {
        let span = 1.0 - 2.0 * self.margin;
        self.lo[k] + (u - self.margin) * (self.hi[k] - self.lo[k]) / span
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(k, &v)| self.apply_coord(k, v)).collect()
    }

    pub fn invert(&self, u: &[f64]) -> Vec<f64> {
        u.iter().enumerate().map(|(k, &v)| self.invert_coord(k, v)).collect()
    }

    /// Applies the map to a row-major block of points.
    pub fn apply_rows(&self, rows: &[f64]) -> Vec<f64> {
        let d = self.dim();
        rows.iter().enumerate().map(|(i, &v)| self.apply_coord(i % d, v)).collect()
    }
}
