use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::poly::RingPoly;
use super::RingError;

pub const DEFAULT_ERROR_STDDEV: f64 = 3.2;

/// Uniform coefficients in `[0, p)`.
pub fn sample_uniform<R: Rng + ?Sized>(p: u64, degree_log2: u32, rng: &mut R) -> RingPoly {
    let n = 1usize << degree_log2;
    let coeffs = (0..n).map(|_| rng.random_range(0..p)).collect();
    RingPoly::new(coeffs, p).expect("uniform coefficients are reduced")
}

/// Coefficients uniform over `{-1, 0, 1}`.
pub fn sample_ternary<R: Rng + ?Sized>(degree_log2: u32, rng: &mut R) -> Vec<i64> {
    (0..1usize << degree_log2).map(|_| rng.random_range(-1i64..=1)).collect()
}

/// Exactly `weight` nonzero coefficients, each `±1`.
pub fn sample_sparse_ternary<R: Rng + ?Sized>(
    degree_log2: u32,
    weight: usize,
    rng: &mut R,
) -> Result<Vec<i64>, RingError> {
    let n = 1usize << degree_log2;
    if weight > n {
        return Err(RingError::InvalidWeight { weight, degree: n });
    }
    let mut s = vec![0i64; n];
    for i in sample_indices(rng, n, weight) {
        s[i] = if rng.random::<bool>() { 1 } else { -1 };
    }
    Ok(s)
}

/// Rounded Gaussian coefficients.
pub fn sample_error<R: Rng + ?Sized>(
    degree_log2: u32,
    stddev: f64,
    rng: &mut R,
) -> Result<Vec<i64>, RingError> {
    if !(stddev.is_finite() && stddev > 0.0) {
        return Err(RingError::InvalidStddev(stddev));
    }
    let normal = Normal::new(0.0, stddev).map_err(|_| RingError::InvalidStddev(stddev))?;
    Ok((0..1usize << degree_log2).map(|_| normal.sample(rng).round() as i64).collect())
}
