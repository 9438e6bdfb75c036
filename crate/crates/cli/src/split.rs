//! Two-party run over a shared work directory.
//!
//! The owner writes `secret.key` and never shares it; every evaluator command
//! reads only `params.txt`, `eval.keys`, `meta.txt` and ciphertext files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use celm_ckks::serialize::{
    deserialize_ciphertexts, deserialize_evaluation_keys, deserialize_secret_key, serialize_ciphertexts,
    serialize_evaluation_keys, serialize_secret_key,
};
use celm_ckks::{build_context, keygen, Ciphertext, CkksContext, EvaluationKeys};
use celm_core::bench::{load_for, parse_key_values, prepare, CkksProfile, ExperimentConfig, HiddenSpec};
use celm_core::chaos::{generate_chaotic_params, generate_uniform_params};
use celm_core::elm::{accuracy, classify, labels_to_targets, OutputMode};
use celm_core::pipeline::{
    encrypted_hidden_matrix, fit_from_encrypted_hidden, predict_encrypted, preflight_range, DataOwner, EncryptedModelParams,
    EvaluatorView,
};
use celm_core::{CoreError, Result};
use clap::Subcommand;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Subcommand)]
pub enum OwnerCommand {
    /// Generate keys into the work directory.
    Keygen {
        #[arg(long)]
        work: PathBuf,
        #[arg(long, default_value = "standard")]
        ckks_profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Prepare a dataset and encrypt rows and input weights.
    Encrypt {
        #[arg(long)]
        work: PathBuf,
        #[arg(long)]
        dataset: String,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
        /// Hidden node count, or `input`.
        #[arg(long, default_value = "input")]
        hidden: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Uniform(0, 1) weights instead of the logistic map.
        #[arg(long)]
        traditional: bool,
    },
    /// Decrypt the hidden layer, solve the output weights, encrypt them.
    Fit {
        #[arg(long)]
        work: PathBuf,
    },
    /// Decrypt test scores and report accuracy.
    Decrypt {
        #[arg(long)]
        work: PathBuf,
        #[arg(long, default_value = "linear")]
        output_mode: String,
    },
}

#[derive(Subcommand)]
pub enum EvaluatorCommand {
    /// Compute the encrypted hidden layer for the training rows.
    Hidden {
        #[arg(long)]
        work: PathBuf,
    },
    /// Score the encrypted test rows.
    Predict {
        #[arg(long)]
        work: PathBuf,
    },
}

const PARAMS: &str = "params.txt";
const SECRET: &str = "secret.key";
const EVAL_KEYS: &str = "eval.keys";
const META: &str = "meta.txt";

fn read_kv(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_key_values(&std::fs::read_to_string(path)?)
}

fn field<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<T> {
    kv.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CoreError::Invalid(format!("work directory metadata lacks '{key}'")))
}

fn context(work: &Path) -> Result<(Arc<CkksContext>, u64)> {
    let kv = read_kv(&work.join(PARAMS))?;
    let profile = CkksProfile::parse(kv.get("profile").map_or("", String::as_str))?;
    Ok((build_context(&profile.params())?, field(&kv, "seed")?))
}

fn eval_keys(work: &Path, ctx: &CkksContext) -> Result<EvaluationKeys> {
    Ok(deserialize_evaluation_keys(ctx, &std::fs::read(work.join(EVAL_KEYS))?)?)
}

fn owner_of(work: &Path, stream: u64) -> Result<DataOwner> {
    let (ctx, seed) = context(work)?;
    let secret = deserialize_secret_key(&ctx, &std::fs::read(work.join(SECRET))?)?;
    let keys = eval_keys(work, &ctx)?;
    Ok(DataOwner::from_parts(ctx, secret, keys, seed.wrapping_mul(31).wrapping_add(stream)))
}

fn write_cts(ctx: &CkksContext, path: &Path, cts: &[Ciphertext]) -> Result<()> {
    std::fs::write(path, serialize_ciphertexts(ctx, cts))?;
    Ok(())
}

fn read_cts(ctx: &CkksContext, path: &Path) -> Result<Vec<Ciphertext>> {
    Ok(deserialize_ciphertexts(ctx, &std::fs::read(path)?)?)
}

fn write_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(path, text)?;
    Ok(())
}

fn read_labels(path: &Path) -> Result<Vec<u8>> {
    std::fs::read_to_string(path)?
        .lines()
        .map(|l| l.trim().parse().map_err(|_| CoreError::Invalid(format!("{}: bad label '{l}'", path.display()))))
        .collect()
}

fn load_params(ctx: &CkksContext, work: &Path) -> Result<EncryptedModelParams> {
    let meta = read_kv(&work.join(META))?;
    let beta_path = work.join("beta.ct");
    Ok(EncryptedModelParams {
        n_features: field(&meta, "n_features")?,
        weights: read_cts(ctx, &work.join("weights.ct"))?,
        biases: read_cts(ctx, &work.join("biases.ct"))?,
        beta: if beta_path.exists() { Some(read_cts(ctx, &beta_path)?) } else { None },
    })
}

pub fn owner(cmd: OwnerCommand) -> Result<()> {
    match cmd {
        OwnerCommand::Keygen { work, ckks_profile, seed } => {
            let profile = CkksProfile::parse(&ckks_profile)?;
            let ctx = build_context(&profile.params())?;
            std::fs::create_dir_all(&work)?;
            let (secret, keys) = keygen(&ctx, &mut ChaCha20Rng::seed_from_u64(seed))?.split();
            std::fs::write(work.join(PARAMS), format!("profile = {}\nseed = {seed}\n", profile.name()))?;
            std::fs::write(work.join(SECRET), serialize_secret_key(&ctx, &secret))?;
            std::fs::write(work.join(EVAL_KEYS), serialize_evaluation_keys(&ctx, &keys))?;
            eprintln!("keys for N = {} written to {}", ctx.degree(), work.display());
        }
        OwnerCommand::Encrypt { work, dataset, data_dir, hidden, seed, traditional } => {
            let mut cfg = ExperimentConfig::new(&dataset);
            cfg.data_dir = data_dir;
            let (schema, ds) = load_for(&cfg)?;
            let data = prepare(&cfg, &ds, &schema)?;
            let n = data.n_features();
            let nodes = HiddenSpec::parse(&hidden)?.resolve(n);
            let (w, b) =
                if traditional { generate_uniform_params(n, nodes, seed)? } else { generate_chaotic_params(n, nodes, seed)? };
            let pre = preflight_range(&data.x_train, &w, &b)?;
            if !pre.violations.is_empty() {
                eprintln!("warning: {} training rows leave the activation range (max |z| = {:.2})", pre.rows_affected(), pre.max_abs);
            }
            let mut owner = owner_of(&work, 1)?;
            let ctx = Arc::clone(owner.context());
            write_cts(&ctx, &work.join("train.ct"), &owner.encrypt_dataset(&data.x_train)?)?;
            write_cts(&ctx, &work.join("test.ct"), &owner.encrypt_dataset(&data.x_test)?)?;
            let params = owner.encrypt_model_params(&w, &b)?;
            write_cts(&ctx, &work.join("weights.ct"), &params.weights)?;
            write_cts(&ctx, &work.join("biases.ct"), &params.biases)?;
            write_labels(&work.join("train_labels.txt"), &data.y_train)?;
            write_labels(&work.join("test_labels.txt"), &data.y_test)?;
            let _ = std::fs::remove_file(work.join("beta.ct"));
            std::fs::write(
                work.join(META),
                format!("dataset = {dataset}\nn_features = {n}\nhidden_nodes = {nodes}\ntrain_rows = {}\ntest_rows = {}\n", data.y_train.len(), data.y_test.len()),
            )?;
            eprintln!("encrypted {} train and {} test rows", data.y_train.len(), data.y_test.len());
        }
        OwnerCommand::Fit { work } => {
            let mut owner = owner_of(&work, 2)?;
            let ctx = Arc::clone(owner.context());
            let nodes: usize = field(&read_kv(&work.join(META))?, "hidden_nodes")?;
            let flat = read_cts(&ctx, &work.join("hidden.ct"))?;
            if nodes == 0 || flat.len() % nodes != 0 {
                return Err(CoreError::Shape(format!("{} hidden ciphertexts for {nodes} nodes", flat.len())));
            }
            let h: Vec<Vec<Ciphertext>> = flat.chunks(nodes).map(<[Ciphertext]>::to_vec).collect();
            let labels = read_labels(&work.join("train_labels.txt"))?;
            let (beta, enc) = fit_from_encrypted_hidden(&mut owner, &h, &labels_to_targets(&labels))?;
            write_cts(&ctx, &work.join("beta.ct"), &enc)?;
            eprintln!("beta = {:?}", beta.as_slice());
        }
        OwnerCommand::Decrypt { work, output_mode } => {
            let owner = owner_of(&work, 3)?;
            let mode = OutputMode::parse(&output_mode)?;
            let scores: Vec<f64> =
                read_cts(owner.context(), &work.join("scores.ct"))?.iter().map(|c| owner.decrypt_slot0(c)).collect();
            let truth = read_labels(&work.join("test_labels.txt"))?;
            let acc = accuracy(&classify(&scores, mode), &truth)?;
            println!("accuracy ({}) = {acc:.4}", mode.name());
        }
    }
    Ok(())
}

pub fn evaluator(cmd: EvaluatorCommand) -> Result<()> {
    let work = match &cmd {
        EvaluatorCommand::Hidden { work } | EvaluatorCommand::Predict { work } => work.clone(),
    };
    let (ctx, _) = context(&work)?;
    let keys = eval_keys(&work, &ctx)?;
    let view = EvaluatorView::new(&ctx, &keys);
    let params = load_params(&ctx, &work)?;
    match cmd {
        EvaluatorCommand::Hidden { .. } => {
            let rows = read_cts(&ctx, &work.join("train.ct"))?;
            let h = encrypted_hidden_matrix(&view, &rows, &params)?;
            let flat: Vec<Ciphertext> = h.into_iter().flatten().collect();
            write_cts(&ctx, &work.join("hidden.ct"), &flat)?;
            eprintln!("hidden layer: {} ciphertexts", flat.len());
        }
        EvaluatorCommand::Predict { .. } => {
            let rows = read_cts(&ctx, &work.join("test.ct"))?;
            let scores = predict_encrypted(&view, &rows, &params)?;
            write_cts(&ctx, &work.join("scores.ct"), &scores)?;
            eprintln!("scored {} rows", scores.len());
        }
    }
    Ok(())
}
