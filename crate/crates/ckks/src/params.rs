use sha2::{Digest, Sha256};

use crate::error::CkksError;
use crate::ring::{MAX_DEGREE_LOG2, DEFAULT_ERROR_STDDEV};

/// Default Hamming weight of the ternary secret.
pub const DEFAULT_SECRET_WEIGHT: usize = 64;

/// Largest total modulus (bits) per ring degree for 128-bit classical security.
pub fn security_bit_budget(degree_log2: u32) -> Option<u32> {
    match degree_log2 {
        12 => Some(109),
        13 => Some(218),
        14 => Some(438),
        15 => Some(881),
        _ => None,
    }
}

/// Scheme parameters.
///
/// `coeff_modulus_bits` lists the prime sizes in chain order: the base prime,
/// the rescaling primes, then the special prime used only by key switching.
#[derive(Clone, Debug, PartialEq)]
pub struct CkksParams {
    pub degree_log2: u32,
    pub coeff_modulus_bits: Vec<u32>,
    pub scale_bits: u32,
    pub error_stddev: f64,
    /// Nonzero count of the ternary secret; `None` samples a dense uniform ternary secret.
    pub secret_weight: Option<usize>,
}

impl CkksParams {
    pub fn new(degree_log2: u32, coeff_modulus_bits: Vec<u32>, scale_bits: u32) -> Self {
        Self {
            degree_log2,
            coeff_modulus_bits,
            scale_bits,
            error_stddev: DEFAULT_ERROR_STDDEV,
            secret_weight: Some(DEFAULT_SECRET_WEIGHT.min(1usize << degree_log2.min(20) >> 1)),
        }
    }

    /// N = 8192, chain [40, 21 x 6, 40], scale 2^21.
    pub fn standard() -> Self {
        Self::new(13, vec![40, 21, 21, 21, 21, 21, 21, 40], 21)
    }

    /// N = 1024 with the same depth; fast but not secure.
    pub fn test_profile() -> Self {
        Self::new(10, vec![30, 21, 21, 21, 21, 21, 21, 30], 21)
    }

    pub fn degree(&self) -> usize {
        1 << self.degree_log2
    }

    pub fn slots(&self) -> usize {
        self.degree() / 2
    }

    pub fn total_bits(&self) -> u32 {
        self.coeff_modulus_bits.iter().sum()
    }

    /// Number of rescales available to a fresh ciphertext.
    pub fn max_level(&self) -> usize {
        self.coeff_modulus_bits.len().saturating_sub(2)
    }

    pub fn scale(&self) -> f64 {
        2f64.powi(self.scale_bits as i32)
    }

    pub fn validate(&self) -> Result<(), CkksError> {
        let bad = |m: String| Err(CkksError::InvalidParams(m));
        if self.degree_log2 < 2 || self.degree_log2 > MAX_DEGREE_LOG2 {
            return bad(format!("ring degree 2^{} out of range", self.degree_log2));
        }
        if self.coeff_modulus_bits.len() < 2 {
            return bad("modulus chain needs a base prime and a special prime".into());
        }
        if let Some(b) = self.coeff_modulus_bits.iter().find(|&&b| !(10..=60).contains(&b)) {
            return bad(format!("prime size {b} bits outside 10..=60"));
        }
        if let Some(cap) = security_bit_budget(self.degree_log2) {
            let total = self.total_bits();
            if total > cap {
                return Err(CkksError::BitBudgetExceeded { total, cap, degree: self.degree() });
            }
        }
        let first = self.coeff_modulus_bits[0];
        if self.scale_bits == 0 || self.scale_bits >= first {
            return bad(format!("scale 2^{} must be below the base prime ({first} bits)", self.scale_bits));
        }
        let special = *self.coeff_modulus_bits.last().unwrap();
        if let Some(&m) = self.coeff_modulus_bits[..self.coeff_modulus_bits.len() - 1].iter().max() {
            if special < m {
                return bad(format!("special prime ({special} bits) smaller than a chain prime ({m} bits)"));
            }
        }
        if !(self.error_stddev.is_finite() && self.error_stddev > 0.0) {
            return bad(format!("error stddev {}", self.error_stddev));
        }
        if let Some(h) = self.secret_weight {
            if h == 0 || h > self.degree() {
                return bad(format!("secret weight {h} for degree {}", self.degree()));
            }
        }
        Ok(())
    }

    /// Stable digest used to bind serialized objects to their parameters.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.degree_log2.to_le_bytes());
        h.update((self.coeff_modulus_bits.len() as u32).to_le_bytes());
        for b in &self.coeff_modulus_bits {
            h.update(b.to_le_bytes());
        }
        h.update(self.scale_bits.to_le_bytes());
        h.update(self.error_stddev.to_bits().to_le_bytes());
        h.update((self.secret_weight.unwrap_or(0) as u64).to_le_bytes());
        h.finalize().into()
    }
}
