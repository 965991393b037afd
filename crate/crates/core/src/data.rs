//! Dataset ingestion and preprocessing.
//!
//! The preparation order is fixed: encode categoricals, normalize the target
//! to `[0, 1]`, fit PCA on the full matrix, project, then rescale each
//! component onto `[0, π]`. Splitting into train/test sets happens
//! afterwards. Every fitted quantity lands in [`Provenance`], and the
//! prepared matrix is produced by the same [`Provenance::transform_features`]
//! call used for unseen rows.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{symmetric_eigen, LinalgError};

pub const MAX_CATEGORIES: usize = 64;
pub const DATASET_FILE: &str = "dataset.csv";
pub const PROVENANCE_FILE: &str = "provenance.json";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}: file has no header row")]
    NoHeader(PathBuf),
    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },
    #[error("target column `{0}` not found")]
    MissingTarget(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}` as {expected}")]
    Unparseable {
        row: usize,
        column: String,
        value: String,
        expected: &'static str,
    },
    #[error("column `{column}` has more than {MAX_CATEGORIES} distinct values")]
    TooManyCategories { column: String },
    #[error("column `{column}`: category `{value}` was not seen when fitting")]
    UnknownCategory { column: String, value: String },
    #[error("target is constant ({0}); cannot normalize")]
    ConstantTarget(f64),
    #[error("dataset has no rows")]
    Empty,
    #[error("PCA needs k ≤ d ({d}), got k = {k}")]
    TooManyComponents { k: usize, d: usize },
    #[error("PCA needs k ≥ 1")]
    ZeroComponents,
    #[error("PCA needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need {needed} rows for the split, have {available}")]
    InsufficientRows { needed: usize, available: usize },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("bad provenance record: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Integer,
    Real,
    Categorical,
    Date,
}

impl ColumnType {
    fn label(self) -> &'static str {
        match self {
            ColumnType::Integer => "integer",
            ColumnType::Real => "real",
            ColumnType::Categorical => "categorical",
            ColumnType::Date => "date",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Integer(i64),
    Real(f64),
    Categorical(String),
    Date(String),
}

impl Cell {
    fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Integer(v) => Some(*v as f64),
            Cell::Real(v) => Some(*v),
            _ => None,
        }
    }
}

/// `dd/mm/yyyy`, `dd-mm-yyyy` or `yyyy-mm-dd`.
fn looks_like_date(s: &str) -> bool {
    let parts: Vec<&str> = s.split(['/', '-']).collect();
    if parts.len() != 3 || parts.iter().any(|p| p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit())) {
        return false;
    }
    let lens: Vec<usize> = parts.iter().map(|p| p.len()).collect();
    matches!(lens.as_slice(), [1 | 2, 1 | 2, 4] | [4, 1 | 2, 1 | 2])
}

fn infer_type(s: &str) -> ColumnType {
    if s.parse::<i64>().is_ok() {
        ColumnType::Integer
    } else if s.parse::<f64>().map(f64::is_finite).unwrap_or(false) {
        ColumnType::Real
    } else if looks_like_date(s) {
        ColumnType::Date
    } else {
        ColumnType::Categorical
    }
}

/// Parsed CSV with one inferred type per column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub columns: Vec<String>,
    pub types: Vec<ColumnType>,
    pub rows: Vec<Vec<Cell>>,
    pub target: String,
}

impl RawDataset {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Columns other than the target.
    pub fn num_attributes(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn target_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| *c == self.target)
            .expect("target presence is checked on construction")
    }

    /// Parses rows of string cells, inferring each column's type from the
    /// first row. Integer columns widen to real when a later cell needs it.
    pub fn from_records(
        columns: Vec<String>,
        records: Vec<Vec<String>>,
        target: &str,
    ) -> Result<Self, DataError> {
        let target_index = columns
            .iter()
            .position(|c| c == target)
            .ok_or_else(|| DataError::MissingTarget(target.to_string()))?;
        let width = columns.len();
        if let Some((i, r)) = records.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(DataError::RaggedRow {
                row: i + 1,
                expected: width,
                got: r.len(),
            });
        }
        let first = records.first().ok_or(DataError::Empty)?;
        let mut types: Vec<ColumnType> = first.iter().map(|s| infer_type(s.trim())).collect();
        if !matches!(types[target_index], ColumnType::Integer | ColumnType::Real) {
            return Err(DataError::Unparseable {
                row: 1,
                column: target.to_string(),
                value: first[target_index].clone(),
                expected: "number",
            });
        }
        // widen integer columns that contain reals
        for (c, ty) in types.iter_mut().enumerate() {
            if *ty == ColumnType::Integer
                && records.iter().any(|r| {
                    let s = r[c].trim();
                    s.parse::<i64>().is_err() && s.parse::<f64>().is_ok()
                })
            {
                *ty = ColumnType::Real;
            }
        }

        let mut rows = Vec::with_capacity(records.len());
        for (i, record) in records.iter().enumerate() {
            let mut row = Vec::with_capacity(width);
            for (c, raw) in record.iter().enumerate() {
                let s = raw.trim();
                let bad = || DataError::Unparseable {
                    row: i + 1,
                    column: columns[c].clone(),
                    value: raw.clone(),
                    expected: types[c].label(),
                };
                let cell = match types[c] {
                    ColumnType::Integer => Cell::Integer(s.parse().map_err(|_| bad())?),
                    ColumnType::Real => {
                        let v: f64 = s.parse().map_err(|_| bad())?;
                        if !v.is_finite() {
                            return Err(bad());
                        }
                        Cell::Real(v)
                    }
                    ColumnType::Date if looks_like_date(s) => Cell::Date(s.to_string()),
                    ColumnType::Date => return Err(bad()),
                    ColumnType::Categorical if s.is_empty() => return Err(bad()),
                    ColumnType::Categorical => Cell::Categorical(s.to_string()),
                };
                row.push(cell);
            }
            rows.push(row);
        }
        Ok(Self {
            columns,
            types,
            rows,
            target: target.to_string(),
        })
    }
}

/// Reads a comma-separated file with a header row.
///
/// Bytes that are not valid UTF-8 are replaced rather than rejected; the
/// public bike-sharing file has a Latin-1 degree sign in one header.
pub fn load_csv(path: impl AsRef<Path>, target: &str) -> Result<RawDataset, DataError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let header = reader.byte_headers()?.clone();
    if header.is_empty() {
        return Err(DataError::NoHeader(path.to_path_buf()));
    }
    let decode = |b: &[u8]| String::from_utf8_lossy(b).trim().to_string();
    let columns: Vec<String> = header.iter().map(decode).collect();
    let records = reader
        .byte_records()
        .map(|r| r.map(|r| r.iter().map(decode).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    RawDataset::from_records(columns, records, target)
}

/// Ordinal codes for one categorical column, in first-appearance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMap {
    pub column: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedFeatures {
    pub names: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub categories: Vec<CategoryMap>,
    pub dropped: Vec<String>,
}

/// Drops date columns and maps categorical columns to ordinal codes.
pub fn encode_categoricals(raw: &RawDataset) -> Result<EncodedFeatures, DataError> {
    let target_index = raw.target_index();
    let mut categories = Vec::new();
    let mut dropped = Vec::new();
    let mut keep = Vec::new();
    for (c, ty) in raw.types.iter().enumerate() {
        if c == target_index {
            continue;
        }
        match ty {
            ColumnType::Date => dropped.push(raw.columns[c].clone()),
            ColumnType::Categorical => {
                let mut values: Vec<String> = Vec::new();
                for row in &raw.rows {
                    if let Cell::Categorical(v) = &row[c] {
                        if !values.contains(v) {
                            values.push(v.clone());
                            if values.len() > MAX_CATEGORIES {
                                return Err(DataError::TooManyCategories {
                                    column: raw.columns[c].clone(),
                                });
                            }
                        }
                    }
                }
                categories.push(CategoryMap {
                    column: raw.columns[c].clone(),
                    values,
                });
                keep.push(c);
            }
            _ => keep.push(c),
        }
    }
    let schema = Schema {
        columns: raw.columns.clone(),
        types: raw.types.clone(),
        target: raw.target.clone(),
        categories: categories.clone(),
    };
    let (matrix, targets) = schema.encode(raw)?;
    Ok(EncodedFeatures {
        names: keep.iter().map(|&c| raw.columns[c].clone()).collect(),
        matrix,
        targets,
        categories,
        dropped,
    })
}

/// Column layout and categorical codes needed to encode rows identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<String>,
    pub types: Vec<ColumnType>,
    pub target: String,
    pub categories: Vec<CategoryMap>,
}

impl Schema {
    fn encode(&self, raw: &RawDataset) -> Result<(Vec<Vec<f64>>, Vec<f64>), DataError> {
        if raw.columns != self.columns {
            return Err(DataError::Schema(format!(
                "expected columns {:?}, got {:?}",
                self.columns, raw.columns
            )));
        }
        let target_index = raw.target_index();
        let codes: BTreeMap<&str, &CategoryMap> =
            self.categories.iter().map(|m| (m.column.as_str(), m)).collect();
        let mut matrix = Vec::with_capacity(raw.rows.len());
        let mut targets = Vec::with_capacity(raw.rows.len());
        for row in &raw.rows {
            let mut out = Vec::new();
            for (c, cell) in row.iter().enumerate() {
                if c == target_index {
                    targets.push(cell.as_f64().ok_or_else(|| DataError::Schema("non-numeric target".into()))?);
                    continue;
                }
                match cell {
                    Cell::Date(_) => {}
                    Cell::Categorical(v) => {
                        let map = codes
                            .get(raw.columns[c].as_str())
                            .ok_or_else(|| DataError::Schema(format!("`{}` is not categorical", raw.columns[c])))?;
                        let code = map.values.iter().position(|x| x == v).ok_or_else(|| {
                            DataError::UnknownCategory {
                                column: raw.columns[c].clone(),
                                value: v.clone(),
                            }
                        })?;
                        out.push(code as f64);
                    }
                    other => out.push(other.as_f64().expect("numeric cell")),
                }
            }
            matrix.push(out);
        }
        Ok((matrix, targets))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub min: f64,
    pub max: f64,
}

impl TargetScaling {
    pub fn apply(&self, y: f64) -> f64 {
        (y - self.min) / (self.max - self.min)
    }

    pub fn invert(&self, y: f64) -> f64 {
        self.min + y * (self.max - self.min)
    }
}

/// Min-max maps `targets` onto `[0, 1]`.
pub fn normalize_target(targets: &[f64]) -> Result<(Vec<f64>, TargetScaling), DataError> {
    let first = *targets.first().ok_or(DataError::Empty)?;
    let (min, max) = targets
        .iter()
        .fold((first, first), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    if max <= min {
        return Err(DataError::ConstantTarget(min));
    }
    let scaling = TargetScaling { min, max };
    Ok((targets.iter().map(|&y| scaling.apply(y)).collect(), scaling))
}

/// Principal axes of mean-centered data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    /// `d × k`, one component per column.
    pub components: Vec<Vec<f64>>,
    /// Covariance eigenvalue of each kept component, descending.
    pub explained_variance: Vec<f64>,
    /// Trace of the covariance matrix.
    pub total_variance: f64,
}

impl PcaBasis {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn num_components(&self) -> usize {
        self.explained_variance.len()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| v / self.total_variance)
            .collect()
    }

    /// `(x − mean) · components` for each row.
    pub fn transform(&self, matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, DataError> {
        let d = self.input_dim();
        let k = self.num_components();
        matrix
            .iter()
            .map(|row| {
                if row.len() != d {
                    return Err(DataError::DimensionMismatch {
                        expected: d,
                        got: row.len(),
                    });
                }
                Ok((0..k)
                    .map(|j| {
                        row.iter()
                            .zip(&self.mean)
                            .zip(&self.components)
                            .map(|((x, m), c)| (x - m) * c[j])
                            .sum()
                    })
                    .collect())
            })
            .collect()
    }

    /// `mean + z · componentsᵀ`; exact only when `k = d`.
    pub fn inverse_transform(&self, reduced: &[Vec<f64>]) -> Vec<Vec<f64>> {
        reduced
            .iter()
            .map(|z| {
                self.mean
                    .iter()
                    .zip(&self.components)
                    .map(|(m, c)| m + z.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
                    .collect()
            })
            .collect()
    }
}

/// Fits `k` principal components via the covariance eigendecomposition.
///
/// Each component is signed so that its largest-magnitude entry is positive.
pub fn fit_pca(matrix: &[Vec<f64>], k: usize) -> Result<PcaBasis, DataError> {
    let m = matrix.len();
    if m < 2 {
        return Err(DataError::TooFewRows(m));
    }
    let d = matrix[0].len();
    if let Some(row) = matrix.iter().find(|r| r.len() != d) {
        return Err(DataError::DimensionMismatch {
            expected: d,
            got: row.len(),
        });
    }
    if k == 0 {
        return Err(DataError::ZeroComponents);
    }
    if k > d {
        return Err(DataError::TooManyComponents { k, d });
    }
    let mean: Vec<f64> = (0..d)
        .map(|j| matrix.iter().map(|r| r[j]).sum::<f64>() / m as f64)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for row in matrix {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, mu)| x - mu).collect();
        for i in 0..d {
            for j in i..d {
                cov[i][j] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= (m - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    let total_variance = (0..d).map(|i| cov[i][i]).sum();
    let eig = symmetric_eigen(&cov)?;
    let mut components = vec![vec![0.0; k]; d];
    for j in 0..k {
        let column: Vec<f64> = (0..d).map(|i| eig.vectors[i][j]).collect();
        let pivot = column
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(1.0);
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            components[i][j] = sign * column[i];
        }
    }
    Ok(PcaBasis {
        mean,
        components,
        explained_variance: eig.values[..k].iter().map(|v| v.max(0.0)).collect(),
        total_variance,
    })
}

/// Per-column min-max map onto `[0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(matrix: &[Vec<f64>]) -> Result<Self, DataError> {
        let first = matrix.first().ok_or(DataError::Empty)?;
        let mut min = first.clone();
        let mut max = first.clone();
        for row in matrix {
            if row.len() != min.len() {
                return Err(DataError::DimensionMismatch {
                    expected: min.len(),
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    /// Values outside the fitted range are clamped; a constant column maps to π/2.
    pub fn apply(&self, matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, DataError> {
        matrix
            .iter()
            .map(|row| {
                if row.len() != self.min.len() {
                    return Err(DataError::DimensionMismatch {
                        expected: self.min.len(),
                        got: row.len(),
                    });
                }
                Ok(row
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let span = self.max[j] - self.min[j];
                        if span <= 0.0 {
                            PI / 2.0
                        } else {
                            (PI * (v - self.min[j]) / span).clamp(0.0, PI)
                        }
                    })
                    .collect())
            })
            .collect()
    }
}

/// Everything fitted during preparation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema: Schema,
    pub feature_columns: Vec<String>,
    pub dropped_columns: Vec<String>,
    pub target_scaling: TargetScaling,
    pub pca: PcaBasis,
    pub scaler: FeatureScaler,
}

impl Provenance {
    /// Projects and rescales an already-encoded matrix.
    pub fn transform_features(&self, encoded: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, DataError> {
        self.scaler.apply(&self.pca.transform(encoded)?)
    }

    /// Encodes, projects and rescales raw rows; targets are normalized with
    /// the fitted scaling (and may fall outside `[0, 1]` for unseen data).
    pub fn transform_raw(&self, raw: &RawDataset) -> Result<(Vec<Vec<f64>>, Vec<f64>), DataError> {
        let (encoded, targets) = self.schema.encode(raw)?;
        let features = self.transform_features(&encoded)?;
        let targets = targets.iter().map(|&y| self.target_scaling.apply(y)).collect();
        Ok((features, targets))
    }
}

/// Feature rows paired with targets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, DataError> {
        if features.len() != targets.len() {
            return Err(DataError::DimensionMismatch {
                expected: features.len(),
                got: targets.len(),
            });
        }
        Ok(Self { features, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// Seeded shuffle; the first `n_train` rows train, the next `n_test` test.
    pub fn split(&self, n_train: usize, n_test: usize, seed: u64) -> Result<(Dataset, Dataset), DataError> {
        let needed = n_train + n_test;
        if needed > self.len() {
            return Err(DataError::InsufficientRows {
                needed,
                available: self.len(),
            });
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Ok((
            self.subset(&order[..n_train]),
            self.subset(&order[n_train..needed]),
        ))
    }
}

/// Prepared matrix plus the record needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericDataset {
    pub data: Dataset,
    pub provenance: Provenance,
    pub num_attributes: usize,
}

impl NumericDataset {
    pub fn num_components(&self) -> usize {
        self.provenance.pca.num_components()
    }
}

/// encode → normalize target → PCA(k) → rescale to `[0, π]`.
pub fn prepare(raw: &RawDataset, k: usize) -> Result<NumericDataset, DataError> {
    let encoded = encode_categoricals(raw)?;
    let (targets, target_scaling) = normalize_target(&encoded.targets)?;
    let pca = fit_pca(&encoded.matrix, k)?;
    let scaler = FeatureScaler::fit(&pca.transform(&encoded.matrix)?)?;
    let provenance = Provenance {
        schema: Schema {
            columns: raw.columns.clone(),
            types: raw.types.clone(),
            target: raw.target.clone(),
            categories: encoded.categories.clone(),
        },
        feature_columns: encoded.names.clone(),
        dropped_columns: encoded.dropped.clone(),
        target_scaling,
        pca,
        scaler,
    };
    let features = provenance.transform_features(&encoded.matrix)?;
    Ok(NumericDataset {
        data: Dataset::new(features, targets)?,
        provenance,
        num_attributes: raw.num_attributes(),
    })
}

/// Writes `dataset.csv` (`pc1..pck,target`) and `provenance.json` under `dir`.
pub fn write_prepared(dir: impl AsRef<Path>, prepared: &NumericDataset) -> Result<(), DataError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(DATASET_FILE);
    let mut writer = csv::Writer::from_path(&path)?;
    let k = prepared.num_components();
    let mut header: Vec<String> = (1..=k).map(|i| format!("pc{i}")).collect();
    header.push("target".into());
    writer.write_record(&header)?;
    for (row, y) in prepared.data.features.iter().zip(&prepared.data.targets) {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(y.to_string());
        writer.write_record(&record)?;
    }
    writer.flush().map_err(io_err(&path))?;
    let json = serde_json::to_string_pretty(&prepared.provenance)?;
    let path = dir.join(PROVENANCE_FILE);
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    Ok(())
}

/// Reads a directory produced by [`write_prepared`].
pub fn read_prepared(dir: impl AsRef<Path>) -> Result<(Dataset, Provenance), DataError> {
    let dir = dir.as_ref();
    let path = dir.join(PROVENANCE_FILE);
    let provenance: Provenance = serde_json::from_str(&fs::read_to_string(&path).map_err(io_err(&path))?)?;
    let path = dir.join(DATASET_FILE);
    let mut reader = csv::Reader::from_path(&path)?;
    let width = reader.headers()?.len();
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != width {
            return Err(DataError::RaggedRow {
                row: i + 1,
                expected: width,
                got: record.len(),
            });
        }
        let values = record
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| DataError::Unparseable {
                    row: i + 1,
                    column: String::new(),
                    value: s.to_string(),
                    expected: "real",
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let (y, x) = values.split_last().ok_or(DataError::Empty)?;
        features.push(x.to_vec());
        targets.push(*y);
    }
    Ok((Dataset::new(features, targets)?, provenance))
}
