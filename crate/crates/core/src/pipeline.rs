//! Encrypted chaotic ELM.
//!
//! Two roles. The [`DataOwner`] holds the secret key, encrypts inputs and
//! decrypts results. The evaluator sees only an [`EvaluatorView`]: the context
//! and public evaluation keys. Hidden activations are computed under
//! encryption, the owner decrypts `H` and solves `β` in plaintext, and `β`
//! returns encrypted for scoring.

use std::sync::Arc;
use std::time::{Duration, Instant};

use celm_ckks::{
    decode, decrypt, encode_at, encode_constant, encrypt, keygen, Ciphertext, CkksContext, EvaluationKeys,
    Evaluator, PublicKey, SecretKey,
};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::elm::{classify, solve_output_weights, OutputMode, POLY_C0, POLY_C1, POLY_C3, POLY_RANGE};
use crate::error::{CoreError, Result};

/// Levels consumed by each stage of encrypted scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelBudget {
    pub dot: usize,
    pub square: usize,
    pub cube: usize,
    pub scalar_mults: usize,
    pub output_mul: usize,
}

impl LevelBudget {
    pub const STANDARD: LevelBudget = LevelBudget { dot: 1, square: 1, cube: 1, scalar_mults: 1, output_mul: 1 };

    pub fn total(&self) -> usize {
        self.dot + self.square + self.cube + self.scalar_mults + self.output_mul
    }

    /// Levels a hidden activation needs before the output product.
    pub fn hidden(&self) -> usize {
        self.total() - self.output_mul
    }

    pub fn check(&self, ctx: &CkksContext) -> Result<()> {
        if self.total() > ctx.max_level() {
            return Err(CoreError::Invalid(format!(
                "encrypted scoring needs {} levels, parameters provide {}",
                self.total(),
                ctx.max_level()
            )));
        }
        Ok(())
    }
}

/// The evaluating party's material. It carries no secret key.
#[derive(Clone, Copy)]
pub struct EvaluatorView<'a> {
    pub ctx: &'a CkksContext,
    pub keys: &'a EvaluationKeys,
}

impl<'a> EvaluatorView<'a> {
    pub fn new(ctx: &'a CkksContext, keys: &'a EvaluationKeys) -> Self {
        Self { ctx, keys }
    }

    fn ev(&self) -> Evaluator<'a> {
        Evaluator::new(self.ctx)
    }
}

/// Key holder: generates keys, encrypts, decrypts.
pub struct DataOwner {
    ctx: Arc<CkksContext>,
    secret: SecretKey,
    keys: EvaluationKeys,
    rng: ChaCha20Rng,
}

impl DataOwner {
    pub fn new(ctx: Arc<CkksContext>, seed: u64) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (secret, keys) = keygen(&ctx, &mut rng)?.split();
        Ok(Self { ctx, secret, keys, rng })
    }

    pub fn from_parts(ctx: Arc<CkksContext>, secret: SecretKey, keys: EvaluationKeys, seed: u64) -> Self {
        Self { ctx, secret, keys, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn context(&self) -> &Arc<CkksContext> {
        &self.ctx
    }

    pub fn evaluation_keys(&self) -> &EvaluationKeys {
        &self.keys
    }

    pub fn secret_key(&self) -> &SecretKey {
        &self.secret
    }

    pub fn view(&self) -> EvaluatorView<'_> {
        EvaluatorView::new(&self.ctx, &self.keys)
    }

    pub fn encrypt_vector(&mut self, v: &[f64]) -> Result<Ciphertext> {
        encrypt_vector(&self.ctx, &self.keys.public, v, &mut self.rng)
    }

    pub fn encrypt_scalar(&mut self, x: f64) -> Result<Ciphertext> {
        encrypt_scalar(&self.ctx, &self.keys.public, x, &mut self.rng)
    }

    pub fn decrypt_slots(&self, ct: &Ciphertext) -> Vec<f64> {
        decode(&self.ctx, &decrypt(&self.ctx, ct, &self.secret))
    }

    pub fn decrypt_slot0(&self, ct: &Ciphertext) -> f64 {
        self.decrypt_slots(ct)[0]
    }

    pub fn encrypt_dataset(&mut self, x: &DMatrix<f64>) -> Result<Vec<Ciphertext>> {
        encrypt_dataset(&self.ctx, &self.keys.public, x, &mut self.rng)
    }

    pub fn encrypt_model_params(&mut self, w: &DMatrix<f64>, b: &DVector<f64>) -> Result<EncryptedModelParams> {
        encrypt_model_params(&self.ctx, &self.keys.public, w, b, &mut self.rng)
    }
}

fn encrypt_vector(ctx: &CkksContext, pk: &PublicKey, v: &[f64], rng: &mut ChaCha20Rng) -> Result<Ciphertext> {
    let pt = encode_at(ctx, v, ctx.default_scale(), ctx.max_level())?;
    Ok(encrypt(ctx, &pt, pk, rng)?)
}

/// `x` replicated in every slot.
fn encrypt_scalar(ctx: &CkksContext, pk: &PublicKey, x: f64, rng: &mut ChaCha20Rng) -> Result<Ciphertext> {
    let pt = encode_constant(ctx, x, ctx.default_scale(), ctx.max_level())?;
    Ok(encrypt(ctx, &pt, pk, rng)?)
}

/// One ciphertext per row, features packed into the leading slots.
pub fn encrypt_dataset(
    ctx: &CkksContext,
    pk: &PublicKey,
    x: &DMatrix<f64>,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<Ciphertext>> {
    if x.ncols() > ctx.slots() {
        return Err(CoreError::Shape(format!("{} features exceed {} slots", x.ncols(), ctx.slots())));
    }
    x.row_iter()
        .map(|r| encrypt_vector(ctx, pk, &r.iter().copied().collect::<Vec<_>>(), rng))
        .collect()
}

#[derive(Clone, Debug)]
pub struct EncryptedModelParams {
    pub n_features: usize,
    /// One packed ciphertext per hidden node.
    pub weights: Vec<Ciphertext>,
    /// Scalar ciphertexts, one per hidden node.
    pub biases: Vec<Ciphertext>,
    /// Scalar ciphertexts of the output weights, once trained.
    pub beta: Option<Vec<Ciphertext>>,
}

pub fn encrypt_model_params(
    ctx: &CkksContext,
    pk: &PublicKey,
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    rng: &mut ChaCha20Rng,
) -> Result<EncryptedModelParams> {
    if w.nrows() != b.len() {
        return Err(CoreError::Shape(format!("{} weight rows, {} biases", w.nrows(), b.len())));
    }
    Ok(EncryptedModelParams {
        n_features: w.ncols(),
        weights: encrypt_dataset(ctx, pk, w, rng)?,
        biases: b.iter().map(|&x| encrypt_scalar(ctx, pk, x, rng)).collect::<Result<_>>()?,
        beta: None,
    })
}

/// `0.5 + 0.197·(w·x + b) - 0.004·(w·x + b)³` in slot 0, at the default scale.
pub fn encrypted_hidden_unit(
    view: &EvaluatorView,
    x: &Ciphertext,
    w: &Ciphertext,
    b: &Ciphertext,
    n_features: usize,
) -> Result<Ciphertext> {
    let ev = view.ev();
    let keys = view.keys;
    let delta = view.ctx.default_scale();
    let u = ev.dot_product(x, w, n_features, &keys.relin, &keys.galois)?;
    let u = ev.add_ct(&u, b)?;
    let u2 = ev.rescale(&ev.square(&u, &keys.relin)?)?;
    let u3 = ev.rescale(&ev.mul_ct(&u2, &u, &keys.relin)?)?;
    // both linear and cubic terms land at `delta` after one more rescale
    let lvl = u3.level();
    let q = view.ctx.primes()[lvl] as f64;
    let cubic = ev.rescale(&ev.mul_const(&u3, POLY_C3, delta * q / u3.scale())?)?;
    let u_low = ev.mod_switch_to(&u, lvl)?;
    let linear = ev.rescale(&ev.mul_const(&u_low, POLY_C1, delta * q / u_low.scale())?)?;
    let sum = ev.add_ct(&cubic, &linear)?;
    let half = encode_constant(view.ctx, POLY_C0, sum.scale(), sum.level())?;
    Ok(ev.add_plain(&sum, &half)?)
}

/// `samples × hidden` grid of encrypted activations.
pub fn encrypted_hidden_matrix(
    view: &EvaluatorView,
    samples: &[Ciphertext],
    params: &EncryptedModelParams,
) -> Result<Vec<Vec<Ciphertext>>> {
    LevelBudget::STANDARD.check(view.ctx)?;
    samples
        .par_iter()
        .map(|x| {
            params
                .weights
                .iter()
                .zip(&params.biases)
                .map(|(w, b)| encrypted_hidden_unit(view, x, w, b, params.n_features))
                .collect()
        })
        .collect()
}

/// Scores `Σ_j h_j·β_j` in slot 0 of each output.
pub fn predict_encrypted(
    view: &EvaluatorView,
    samples: &[Ciphertext],
    params: &EncryptedModelParams,
) -> Result<Vec<Ciphertext>> {
    let beta = params.beta.as_ref().ok_or(CoreError::NotFit)?;
    let ev = view.ev();
    let h = encrypted_hidden_matrix(view, samples, params)?;
    h.par_iter()
        .map(|row| {
            let mut acc: Option<Ciphertext> = None;
            for (hj, bj) in row.iter().zip(beta) {
                let t = ev.rescale(&ev.mul_ct(hj, bj, &view.keys.relin)?)?;
                acc = Some(match acc {
                    None => t,
                    Some(a) => ev.add_ct(&a, &t)?,
                });
            }
            acc.ok_or_else(|| CoreError::Invalid("model has no hidden nodes".into()))
        })
        .collect()
}

/// Owner side of training: decrypt `H`, solve `β`, encrypt each component.
pub fn fit_from_encrypted_hidden(
    owner: &mut DataOwner,
    h: &[Vec<Ciphertext>],
    targets: &DVector<f64>,
) -> Result<(DVector<f64>, Vec<Ciphertext>)> {
    let rows = h.len();
    let cols = h.first().map_or(0, |r| r.len());
    let mut hm = DMatrix::zeros(rows, cols);
    for (i, row) in h.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            hm[(i, j)] = owner.decrypt_slot0(c);
        }
    }
    let beta = solve_output_weights(&hm, targets)?;
    let enc = beta.iter().map(|&x| owner.encrypt_scalar(x)).collect::<Result<_>>()?;
    Ok((beta, enc))
}

/// Full training: encrypted hidden layer by the evaluator, solve by the owner.
pub fn train_encrypted(
    owner: &mut DataOwner,
    samples: &[Ciphertext],
    targets: &DVector<f64>,
    params: &mut EncryptedModelParams,
) -> Result<DVector<f64>> {
    let h = encrypted_hidden_matrix(&owner.view(), samples, params)?;
    let (beta, enc) = fit_from_encrypted_hidden(owner, &h, targets)?;
    params.beta = Some(enc);
    Ok(beta)
}

pub fn decrypt_and_classify(owner: &DataOwner, scores: &[Ciphertext], mode: OutputMode) -> (Vec<f64>, Vec<u8>) {
    let s: Vec<f64> = scores.iter().map(|c| owner.decrypt_slot0(c)).collect();
    let labels = classify(&s, mode);
    (s, labels)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RangeViolation {
    pub row: usize,
    pub node: usize,
    pub value: f64,
}

/// Rows whose pre-activation leaves the interval where the cubic tracks the sigmoid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RangeReport {
    pub checked: usize,
    pub violations: Vec<RangeViolation>,
    pub max_abs: f64,
}

impl RangeReport {
    pub fn rows_affected(&self) -> usize {
        let mut rows: Vec<usize> = self.violations.iter().map(|v| v.row).collect();
        rows.dedup();
        rows.len()
    }
}

/// Plaintext check of `|w·x + b| ≤ 5`, run by the owner before encrypting.
pub fn preflight_range(x: &DMatrix<f64>, w: &DMatrix<f64>, b: &DVector<f64>) -> Result<RangeReport> {
    if x.ncols() != w.ncols() || w.nrows() != b.len() {
        return Err(CoreError::Shape("preflight shapes".into()));
    }
    let z = x * w.transpose();
    let mut r = RangeReport { checked: z.len(), ..Default::default() };
    for i in 0..z.nrows() {
        for j in 0..z.ncols() {
            let v = z[(i, j)] + b[j];
            r.max_abs = r.max_abs.max(v.abs());
            if v.abs() > POLY_RANGE {
                r.violations.push(RangeViolation { row: i, node: j, value: v });
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub encrypt: Duration,
    pub train: Duration,
    pub predict: Duration,
    pub decrypt: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.encrypt + self.train + self.predict + self.decrypt
    }
}

#[derive(Clone, Debug)]
pub struct EncryptedRun {
    pub beta: DVector<f64>,
    pub test_scores: Vec<f64>,
    pub preflight: RangeReport,
    pub timings: PhaseTimings,
}

/// Encrypt, train, score and decrypt one split end to end.
pub fn run_encrypted(
    ctx: Arc<CkksContext>,
    x_train: &DMatrix<f64>,
    y_train: &DVector<f64>,
    x_test: &DMatrix<f64>,
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    seed: u64,
) -> Result<EncryptedRun> {
    let mut owner = DataOwner::new(ctx, seed)?;
    let preflight = preflight_range(x_train, w, b)?;
    let mut t = PhaseTimings::default();

    let start = Instant::now();
    let enc_train = owner.encrypt_dataset(x_train)?;
    let enc_test = owner.encrypt_dataset(x_test)?;
    let mut params = owner.encrypt_model_params(w, b)?;
    t.encrypt = start.elapsed();

    let start = Instant::now();
    let beta = train_encrypted(&mut owner, &enc_train, y_train, &mut params)?;
    t.train = start.elapsed();

    let start = Instant::now();
    let scores = predict_encrypted(&owner.view(), &enc_test, &params)?;
    t.predict = start.elapsed();

    let start = Instant::now();
    let test_scores = scores.iter().map(|c| owner.decrypt_slot0(c)).collect();
    t.decrypt = start.elapsed();

    Ok(EncryptedRun { beta, test_scores, preflight, timings: t })
}
