//! Arithmetic in `Z_p[X]/(X^N + 1)`.

mod modulus;
mod ntt;
mod poly;
mod primes;
mod sample;

pub use modulus::Modulus;
pub use ntt::{bit_reverse, make_ntt_tables, NttTables, MAX_DEGREE_LOG2};
pub use poly::{negacyclic_mul, ntt_forward, ntt_inverse, poly_add, poly_scalar_mul, poly_sub, RingPoly};
pub use primes::{is_prime, ntt_primes_below, primitive_root_of_unity};
pub use sample::{
    sample_error, sample_sparse_ternary, sample_ternary, sample_uniform, DEFAULT_ERROR_STDDEV,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RingError {
    #[error("{0} is not an odd prime below 2^61")]
    NotPrime(u64),
    #[error("modulus {p} has no primitive {two_n}-th root of unity (needs p ≡ 1 mod {two_n})")]
    NoRootOfUnity { p: u64, two_n: u64 },
    #[error("ring degree 2^{0} is unsupported")]
    InvalidDegree(u32),
    #[error("coefficient vector length {0} is not a power of two ≥ 2")]
    InvalidLength(usize),
    #[error("coefficient {value} is not reduced modulo {modulus}")]
    CoefficientOutOfRange { value: u64, modulus: u64 },
    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("degrees differ: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("invalid error stddev {0}")]
    InvalidStddev(f64),
    #[error("hamming weight {weight} exceeds degree {degree}")]
    InvalidWeight { weight: usize, degree: usize },
}
