use std::sync::Arc;
use std::time::{Duration, Instant};

use celm_ckks::{build_context, CkksContext};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::config::{ExperimentConfig, HiddenSpec, Variant};
use super::report::{ArmResult, ExperimentReport, PhaseSeconds};
use crate::chaos::{generate_chaotic_params_with, generate_uniform_params};
use crate::data::{
    label_encode, load_dataset, schema_path, smote, split_indices, Dataset, DatasetSchema, FeatureKind, LoadOptions,
    Standardizer,
};
use crate::elm::{accuracy, classify, labels_to_targets, Activation, ElmModel};
use crate::error::{CoreError, Result};
use crate::pipeline::run_encrypted;

/// Train and test matrices shared by every arm of one experiment.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub x_train: DMatrix<f64>,
    pub y_train: Vec<u8>,
    pub x_test: DMatrix<f64>,
    pub y_test: Vec<u8>,
    /// Preprocessing steps applied, in order.
    pub notes: Vec<(String, String)>,
}

impl PreparedData {
    pub fn n_features(&self) -> usize {
        self.x_train.ncols()
    }
}

/// Encodes, oversamples, splits and standardizes a loaded dataset.
pub fn prepare(cfg: &ExperimentConfig, ds: &Dataset, schema: &DatasetSchema) -> Result<PreparedData> {
    let mut notes = Vec::new();
    let ds = if ds.feature_kinds.iter().any(|k| matches!(k, FeatureKind::Categorical(_))) {
        notes.push(("categorical".into(), "label-encoded (sorted level order)".into()));
        label_encode(ds)?
    } else {
        ds.clone()
    };
    let mut x = ds.features()?;
    let mut y = ds.labels.clone();
    let counts = ds.class_counts();
    notes.push(("rows_loaded".into(), format!("{} ({} / {})", y.len(), counts[0], counts[1])));

    if schema.smote && cfg.smote_before_split {
        (x, y) = smote(&x, &y, cfg.smote_k, None, cfg.split.seed)?;
        let ones = y.iter().filter(|&&l| l == 1).count();
        notes.push(("smote".into(), format!("before split, {} / {}", y.len() - ones, ones)));
    }

    let (tr, te) = split_indices(&y, cfg.split.train_fraction, cfg.split.seed)?;
    let pick = |idx: &[usize]| (x.select_rows(idx), idx.iter().map(|&i| y[i]).collect::<Vec<u8>>());
    let (mut x_train, mut y_train) = pick(&tr);
    let (mut x_test, y_test) = pick(&te);

    if schema.smote && !cfg.smote_before_split {
        (x_train, y_train) = smote(&x_train, &y_train, cfg.smote_k, None, cfg.split.seed)?;
        notes.push(("smote".into(), "after split, training rows only".into()));
    }
    notes.push(("split_rows".into(), format!("{} train / {} test", y_train.len(), y_test.len())));

    if schema.standardize {
        let s = if cfg.scale_on_all { Standardizer::fit(&x)? } else { Standardizer::fit(&x_train)? };
        x_train = s.apply(&x_train)?;
        x_test = s.apply(&x_test)?;
        let on = if cfg.scale_on_all { "all rows" } else { "training rows" };
        notes.push(("standardize".into(), format!("z-score fitted on {on}")));
    } else {
        notes.push(("standardize".into(), "off".into()));
    }
    Ok(PreparedData { x_train, y_train, x_test, y_test, notes })
}

/// Loads the dataset named by the config, with its schema.
pub fn load_for(cfg: &ExperimentConfig) -> Result<(DatasetSchema, Dataset)> {
    let schema = DatasetSchema::load(&schema_path(&cfg.data_dir, &cfg.dataset))?;
    let opts = LoadOptions { allow_checksum_mismatch: cfg.allow_checksum_mismatch, ..LoadOptions::default() };
    let ds = load_dataset(&cfg.data_dir, &schema, opts)?;
    Ok((schema, ds))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (schema, ds) = load_for(cfg)?;
    let data = prepare(cfg, &ds, &schema)?;
    let mut report = run_prepared(cfg, &data)?;
    report.title = schema.title.clone();
    if let Some(p) = &ds.provenance {
        report.config.push(("data_sha256".into(), p.sha256.clone()));
        report.config.push(("data_verified".into(), p.verified.to_string()));
    }
    Ok(report)
}

fn micros(d: Duration) -> f64 {
    d.as_micros() as f64 / 1e6
}

struct Arm {
    variant: Variant,
    hidden: HiddenSpec,
    seed: u64,
}

fn run_arm(
    cfg: &ExperimentConfig,
    data: &PreparedData,
    ctx: Option<&Arc<CkksContext>>,
    arm: &Arm,
) -> Result<ArmResult> {
    let n = data.n_features();
    let nodes = arm.hidden.resolve(n);
    let (w, b) = if arm.variant.chaotic() {
        generate_chaotic_params_with(n, nodes, arm.seed, cfg.burn_in)?
    } else {
        generate_uniform_params(n, nodes, arm.seed)?
    };
    let targets = labels_to_targets(&data.y_train);
    let (scores, time, violations) = if arm.variant.encrypted() {
        let ctx = ctx.ok_or_else(|| CoreError::Invalid("encrypted variant without a CKKS context".into()))?;
        let run = run_encrypted(Arc::clone(ctx), &data.x_train, &targets, &data.x_test, &w, &b, arm.seed)?;
        let t = &run.timings;
        let time = PhaseSeconds {
            encrypt: micros(t.encrypt),
            train: micros(t.train),
            predict: micros(t.predict),
            decrypt: micros(t.decrypt),
        };
        (run.test_scores, time, run.preflight.rows_affected())
    } else {
        let mut model = ElmModel::new(w, b, Activation::Sigmoid)?;
        let start = Instant::now();
        model.fit(&data.x_train, &targets)?;
        let train = start.elapsed();
        let start = Instant::now();
        let scores = model.predict_scores(&data.x_test)?;
        let predict = start.elapsed();
        let time = PhaseSeconds { train: micros(train), predict: micros(predict), ..PhaseSeconds::default() };
        (scores.as_slice().to_vec(), time, 0)
    };
    let accuracies = cfg
        .output_modes
        .iter()
        .map(|&m| Ok((m, accuracy(&classify(&scores, m), &data.y_test)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ArmResult {
        variant: arm.variant,
        hidden: arm.hidden,
        hidden_nodes: nodes,
        seed: arm.seed,
        accuracies,
        time,
        range_violations: violations,
    })
}

/// Runs every (variant, hidden, seed) arm on already prepared data.
///
/// Plaintext arms run concurrently. Encrypted arms run one at a time and
/// parallelize internally, so their wall times are not inflated by contention.
pub fn run_prepared(cfg: &ExperimentConfig, data: &PreparedData) -> Result<ExperimentReport> {
    cfg.validate()?;
    let n = data.n_features();
    if n == 0 {
        return Err(CoreError::Invalid("dataset has no features".into()));
    }
    let ctx = if cfg.variants.iter().any(|v| v.encrypted()) {
        Some(build_context(&cfg.ckks_profile.params())?)
    } else {
        None
    };
    let mut arms = Vec::new();
    for &variant in &cfg.variants {
        for &hidden in &cfg.hidden {
            for &seed in &cfg.seeds {
                arms.push(Arm { variant, hidden, seed });
            }
        }
    }
    let (enc, plain): (Vec<&Arm>, Vec<&Arm>) = arms.iter().partition(|a| a.variant.encrypted());
    let mut results: Vec<ArmResult> =
        plain.par_iter().map(|a| run_arm(cfg, data, ctx.as_ref(), a)).collect::<Result<_>>()?;
    for a in enc {
        results.push(run_arm(cfg, data, ctx.as_ref(), a)?);
    }
    results.sort_by(|a, b| (a.variant, a.hidden, a.seed).cmp(&(b.variant, b.hidden, b.seed)));

    let mut config = cfg.echo();
    config.extend(data.notes.iter().cloned());
    config.push(("n_features".into(), n.to_string()));
    Ok(ExperimentReport {
        dataset: cfg.dataset.clone(),
        title: cfg.dataset.clone(),
        n_features: n,
        variants: cfg.variants.clone(),
        hidden: cfg.hidden.clone(),
        output_modes: cfg.output_modes.clone(),
        arms: results,
        config,
    })
}

/// Plaintext scores and labels for reuse by fidelity checks.
pub fn plain_scores(
    data: &PreparedData,
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    activation: Activation,
) -> Result<Vec<f64>> {
    let mut model = ElmModel::new(w.clone(), b.clone(), activation)?;
    model.fit(&data.x_train, &labels_to_targets(&data.y_train))?;
    Ok(model.predict_scores(&data.x_test)?.as_slice().to_vec())
}
