use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::loader::{Column, Dataset};
use super::schema::FeatureKind;
use crate::error::{CoreError, Result};

pub const DEFAULT_SMOTE_K: usize = 5;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;
pub const DEFAULT_SPLIT_SEED: u64 = 42;

/// Replaces each categorical column by the index of its value in the sorted level list.
pub fn label_encode(ds: &Dataset) -> Result<Dataset> {
    let mut out = ds.clone();
    for (j, (col, kind)) in ds.columns.iter().zip(&ds.feature_kinds).enumerate() {
        if let (Column::Categorical(values), FeatureKind::Categorical(levels)) = (col, kind) {
            let mut sorted = levels.clone();
            sorted.sort();
            let encoded = values
                .iter()
                .map(|v| {
                    sorted
                        .iter()
                        .position(|l| l == v)
                        .map(|i| i as f64)
                        .ok_or_else(|| CoreError::Invalid(format!("unknown level '{v}' in '{}'", ds.feature_names[j])))
                })
                .collect::<Result<Vec<_>>>()?;
            out.columns[j] = Column::Numeric(encoded);
            out.feature_kinds[j] = FeatureKind::Numeric;
        }
    }
    Ok(out)
}

/// Per-column mean and population standard deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: DVector<f64>,
    pub std: DVector<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(CoreError::Invalid("cannot standardize zero rows".into()));
        }
        let n = x.nrows() as f64;
        let mean = DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / n));
        let std = DVector::from_iterator(
            x.ncols(),
            x.column_iter().zip(mean.iter()).map(|(c, &m)| (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt()),
        );
        Ok(Self { mean, std })
    }

    /// Zero-variance columns map to 0.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(CoreError::Shape(format!("{} columns, fitted on {}", x.ncols(), self.mean.len())));
        }
        let mut out = x.clone();
        for (j, mut c) in out.column_iter_mut().enumerate() {
            let (m, s) = (self.mean[j], self.std[j]);
            for v in c.iter_mut() {
                *v = if s > 0.0 { (*v - m) / s } else { 0.0 };
            }
        }
        Ok(out)
    }
}

/// Fits on `fit_on` and transforms each of `targets`.
pub fn standardize(fit_on: &DMatrix<f64>, targets: &[&DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
    let s = Standardizer::fit(fit_on)?;
    targets.iter().map(|t| s.apply(t)).collect()
}

fn sq_dist(x: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    x.row(a).iter().zip(x.row(b).iter()).map(|(p, q)| (p - q).powi(2)).sum()
}

/// Synthetic minority oversampling: new points on segments to one of the `k`
/// nearest minority neighbours, until the minority class reaches `target_count`
/// (default: the majority count). Returns the original rows followed by the synthetic ones.
pub fn smote(
    x: &DMatrix<f64>,
    labels: &[u8],
    k: usize,
    target_count: Option<usize>,
    seed: u64,
) -> Result<(DMatrix<f64>, Vec<u8>)> {
    if x.nrows() != labels.len() {
        return Err(CoreError::Shape(format!("{} rows for {} labels", x.nrows(), labels.len())));
    }
    let ones = labels.iter().filter(|&&l| l == 1).count();
    let zeros = labels.len() - ones;
    let (minority, majority_count) = if ones <= zeros { (1u8, zeros) } else { (0u8, ones) };
    let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == minority).collect();
    let target = target_count.unwrap_or(majority_count);
    if target <= idx.len() {
        return Ok((x.clone(), labels.to_vec()));
    }
    if idx.len() < 2 {
        return Err(CoreError::Invalid(format!("minority class has {} sample(s); cannot interpolate", idx.len())));
    }
    if k == 0 {
        return Err(CoreError::Invalid("smote needs k ≥ 1".into()));
    }
    let k = k.min(idx.len() - 1);
    let neighbours: Vec<Vec<usize>> = idx
        .iter()
        .map(|&a| {
            let mut others: Vec<(f64, usize)> = idx.iter().filter(|&&b| b != a).map(|&b| (sq_dist(x, a, b), b)).collect();
            others.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            others.into_iter().take(k).map(|(_, b)| b).collect()
        })
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let extra = target - idx.len();
    let mut out = DMatrix::zeros(x.nrows() + extra, x.ncols());
    out.rows_mut(0, x.nrows()).copy_from(x);
    for s in 0..extra {
        let base = s % idx.len();
        let nb = neighbours[base][rng.random_range(0..k)];
        let u: f64 = rng.random();
        let a = x.row(idx[base]);
        let row = &a + (x.row(nb) - a) * u;
        out.row_mut(x.nrows() + s).copy_from(&row);
    }
    let mut labs = labels.to_vec();
    labs.extend(std::iter::repeat_n(minority, extra));
    Ok((out, labs))
}

pub fn smote_dataset(ds: &Dataset, k: usize, target_count: Option<usize>, seed: u64) -> Result<Dataset> {
    let (x, y) = smote(&ds.features()?, &ds.labels, k, target_count, seed)?;
    ds.with_features(&x, y)
}

/// Stratified train/test row indices.
pub fn split_indices(labels: &[u8], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CoreError::Invalid(format!("train fraction {train_fraction} not in (0, 1)")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_train = (idx.len() as f64 * train_fraction).round() as usize;
        if n_train == 0 || n_train == idx.len() {
            return Err(CoreError::Invalid(format!(
                "class {class} has {} samples; cannot appear in both folds",
                idx.len()
            )));
        }
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (tr, te) = split_indices(&ds.labels, train_fraction, seed)?;
    Ok((ds.select_rows(&tr), ds.select_rows(&te)))
}
