use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use super::schema::{DatasetSchema, FeatureKind};
use crate::error::{io_at, CoreError, Result};

/// Name of the checksum ledger kept next to the data files.
pub const CHECKSUM_FILE: &str = "CHECKSUMS";

#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    fn select(&self, idx: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(idx.iter().map(|&i| v[i]).collect()),
            Column::Categorical(v) => Column::Categorical(idx.iter().map(|&i| v[i].clone()).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub path: PathBuf,
    pub sha256: String,
    /// Whether a recorded checksum existed and matched.
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    pub feature_kinds: Vec<FeatureKind>,
    pub columns: Vec<Column>,
    pub labels: Vec<u8>,
    pub provenance: Option<Provenance>,
}

impl Dataset {
    /// A purely numeric dataset from a `samples × features` matrix.
    pub fn from_matrix(name: &str, x: &DMatrix<f64>, labels: Vec<u8>) -> Result<Self> {
        if x.nrows() != labels.len() {
            return Err(CoreError::Shape(format!("{} rows for {} labels", x.nrows(), labels.len())));
        }
        Ok(Self {
            name: name.to_string(),
            feature_names: (0..x.ncols()).map(|j| format!("x{j}")).collect(),
            feature_kinds: vec![FeatureKind::Numeric; x.ncols()],
            columns: x.column_iter().map(|c| Column::Numeric(c.iter().copied().collect())).collect(),
            labels,
            provenance: None,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    /// The feature matrix; fails while categorical columns remain unencoded.
    pub fn features(&self) -> Result<DMatrix<f64>> {
        let n = self.n_samples();
        let mut m = DMatrix::zeros(n, self.columns.len());
        for (j, c) in self.columns.iter().enumerate() {
            match c {
                Column::Numeric(v) => m.column_mut(j).copy_from_slice(v),
                Column::Categorical(_) => {
                    return Err(CoreError::Invalid(format!("column '{}' is not encoded", self.feature_names[j])))
                }
            }
        }
        Ok(m)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.iter().map(|c| c.select(idx)).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            ..self.clone()
        }
    }

    /// Replaces all features with numeric columns from `x` (same row order).
    pub fn with_features(&self, x: &DMatrix<f64>, labels: Vec<u8>) -> Result<Dataset> {
        if x.ncols() != self.n_features() {
            return Err(CoreError::Shape(format!("{} columns for {} features", x.ncols(), self.n_features())));
        }
        let mut d = Dataset::from_matrix(&self.name, x, labels)?;
        d.feature_names = self.feature_names.clone();
        d.provenance = self.provenance.clone();
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    pub allow_checksum_mismatch: bool,
    pub verify_counts: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { allow_checksum_mismatch: false, verify_counts: true }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads `<dir>/CHECKSUMS` (`<sha256>  <file>` per line); a missing ledger is empty.
pub fn read_checksums(dir: &Path) -> Result<BTreeMap<String, String>> {
    let path = dir.join(CHECKSUM_FILE);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some(sum), Some(file)) => {
                out.insert(file.to_string(), sum.to_ascii_lowercase());
            }
            _ => return Err(CoreError::Data { path, message: format!("bad checksum line '{line}'") }),
        }
    }
    Ok(out)
}

pub fn write_checksums(dir: &Path, sums: &BTreeMap<String, String>) -> Result<()> {
    let mut text = String::new();
    for (file, sum) in sums {
        text.push_str(&format!("{sum}  {file}\n"));
    }
    std::fs::write(dir.join(CHECKSUM_FILE), text)?;
    Ok(())
}

fn normalize_name(s: &str) -> String {
    s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

/// Parses CSV text against a schema without touching the filesystem.
pub fn parse_csv(text: &[u8], schema: &DatasetSchema, origin: &Path) -> Result<Dataset> {
    let err = |message: String| CoreError::Data { path: origin.to_path_buf(), message };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text);
    let label_idx = schema.label_index();
    let n_cols = schema.columns.len();
    let mut columns: Vec<Column> = schema
        .feature_kinds
        .iter()
        .map(|k| match k {
            FeatureKind::Numeric => Column::Numeric(Vec::new()),
            FeatureKind::Categorical(_) => Column::Categorical(Vec::new()),
        })
        .collect();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(format!("row {}: {e}", i + 1)))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if i == 0 && schema.header {
            let got: Vec<String> = rec.iter().map(normalize_name).collect();
            let want: Vec<String> = schema.columns.iter().map(|c| normalize_name(c)).collect();
            if got != want {
                return Err(err(format!("header {:?} does not match schema columns", rec.iter().collect::<Vec<_>>())));
            }
            continue;
        }
        if rec.len() != n_cols {
            return Err(err(format!("row {}: {} fields, expected {n_cols}", i + 1, rec.len())));
        }
        let mut f = 0;
        for (c, cell) in rec.iter().enumerate() {
            if c == label_idx {
                let class = schema
                    .class_of(cell)
                    .ok_or_else(|| err(format!("row {}: unknown label '{cell}'", i + 1)))?;
                labels.push(class);
                continue;
            }
            match (&mut columns[f], &schema.feature_kinds[f]) {
                (Column::Numeric(v), _) => {
                    let x: f64 = cell
                        .parse()
                        .ok()
                        .filter(|x: &f64| x.is_finite())
                        .ok_or_else(|| err(format!("row {}, column '{}': unparseable '{cell}'", i + 1, schema.columns[c])))?;
                    v.push(x);
                }
                (Column::Categorical(v), FeatureKind::Categorical(levels)) => {
                    if !levels.iter().any(|l| l == cell) {
                        return Err(err(format!("row {}, column '{}': unknown level '{cell}'", i + 1, schema.columns[c])));
                    }
                    v.push(cell.to_string());
                }
                _ => unreachable!("column storage follows schema kinds"),
            }
            f += 1;
        }
    }
    debug_assert!(columns.iter().all(|c| c.len() == labels.len()));
    if labels.is_empty() {
        return Err(err("no data rows".into()));
    }
    Ok(Dataset {
        name: schema.name.clone(),
        feature_names: schema.feature_names(),
        feature_kinds: schema.feature_kinds.clone(),
        columns,
        labels,
        provenance: None,
    })
}

pub fn validate_counts(ds: &Dataset, schema: &DatasetSchema) -> Result<()> {
    let path = ds.provenance.as_ref().map(|p| p.path.clone()).unwrap_or_default();
    if let Some(rows) = schema.expected_rows {
        if ds.n_samples() != rows {
            return Err(CoreError::Data { path, message: format!("{} rows, expected {rows}", ds.n_samples()) });
        }
    }
    if let Some(c) = schema.expected_class_counts {
        if ds.class_counts() != c {
            return Err(CoreError::Data { path, message: format!("class counts {:?}, expected {c:?}", ds.class_counts()) });
        }
    }
    Ok(())
}

/// Loads a data file, checking its checksum against the directory's ledger.
pub fn load_csv(path: &Path, schema: &DatasetSchema, opts: LoadOptions) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| io_at(path, e))?;
    let actual = sha256_hex(&bytes);
    let dir = path.parent().unwrap_or(Path::new("."));
    let file = path.file_name().and_then(|f| f.to_str()).unwrap_or_default();
    let recorded = read_checksums(dir)?.get(file).cloned();
    let verified = match &recorded {
        Some(expected) if *expected != actual => {
            if !opts.allow_checksum_mismatch {
                return Err(CoreError::Checksum { path: path.to_path_buf(), expected: expected.clone(), actual });
            }
            false
        }
        Some(_) => true,
        None => false,
    };
    let mut ds = parse_csv(&bytes, schema, path)?;
    ds.provenance = Some(Provenance { path: path.to_path_buf(), sha256: actual, verified });
    if opts.verify_counts {
        validate_counts(&ds, schema)?;
    }
    Ok(ds)
}

/// Loads `<data_dir>/<schema.file>`.
pub fn load_dataset(data_dir: &Path, schema: &DatasetSchema, opts: LoadOptions) -> Result<Dataset> {
    load_csv(&data_dir.join(&schema.file), schema, opts)
}
