//! Logistic-map weight generator.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::CoreError;

pub const LOGISTIC_R: f64 = 4.0;
pub const DEFAULT_BURN_IN: usize = 100;
/// Minimum distance of a starting point from the map's degenerate points.
pub const DEGENERATE_MARGIN: f64 = 1e-9;

const DEGENERATE: [f64; 3] = [0.25, 0.5, 0.75];

fn is_degenerate(x: f64) -> bool {
    !(x > 0.0 && x < 1.0) || DEGENERATE.iter().any(|d| (x - d).abs() < DEGENERATE_MARGIN)
}

/// Iterates `x ← 4x(1 - x)`.
#[derive(Clone, Debug)]
pub struct LogisticMapStream {
    state: f64,
}

impl LogisticMapStream {
    /// Draws `x0` uniformly from the seed, redrawing degenerate points, then discards `burn_in` iterates.
    pub fn new(seed: u64, burn_in: usize) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut x0: f64 = rng.random();
        while is_degenerate(x0) {
            x0 = rng.random();
        }
        let mut s = Self { state: x0 };
        for _ in 0..burn_in {
            s.step();
        }
        s
    }

    /// Starts from an explicit point with no burn-in.
    pub fn from_state(x0: f64) -> Result<Self, CoreError> {
        if is_degenerate(x0) {
            return Err(CoreError::Invalid(format!("degenerate logistic start {x0}")));
        }
        Ok(Self { state: x0 })
    }

    pub fn state(&self) -> f64 {
        self.state
    }

    fn step(&mut self) -> f64 {
        let x = LOGISTIC_R * self.state * (1.0 - self.state);
        // 1.0 would map to the absorbing 0; nudge back inside the interval
        self.state = x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        self.state
    }
}

impl Iterator for LogisticMapStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.step())
    }
}

/// Input weights (`n_hidden × n_inputs`, filled row-major) then biases, from one stream.
pub fn generate_chaotic_params(
    n_inputs: usize,
    n_hidden: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, DVector<f64>), CoreError> {
    generate_chaotic_params_with(n_inputs, n_hidden, seed, DEFAULT_BURN_IN)
}

pub fn generate_chaotic_params_with(
    n_inputs: usize,
    n_hidden: usize,
    seed: u64,
    burn_in: usize,
) -> Result<(DMatrix<f64>, DVector<f64>), CoreError> {
    if n_inputs == 0 || n_hidden == 0 {
        return Err(CoreError::Invalid("weight shape must be non-empty".into()));
    }
    let mut s = LogisticMapStream::new(seed, burn_in);
    let w = DMatrix::from_row_iterator(n_hidden, n_inputs, s.by_ref().take(n_hidden * n_inputs));
    let b = DVector::from_iterator(n_hidden, s.take(n_hidden));
    Ok((w, b))
}

/// Uniform(0, 1) input weights and biases.
pub fn generate_uniform_params(
    n_inputs: usize,
    n_hidden: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, DVector<f64>), CoreError> {
    if n_inputs == 0 || n_hidden == 0 {
        return Err(CoreError::Invalid("weight shape must be non-empty".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let w = DMatrix::from_fn(n_hidden, n_inputs, |_, _| rng.random::<f64>());
    let b = DVector::from_fn(n_hidden, |_, _| rng.random::<f64>());
    Ok((w, b))
}
