use crate::ring::RingError;

#[derive(Debug, thiserror::Error)]
pub enum CkksError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("modulus chain uses {total} bits but degree {degree} allows at most {cap}")]
    BitBudgetExceeded { total: u32, cap: u32, degree: usize },
    #[error("found {found} of {needed} {bits}-bit primes ≡ 1 mod {two_n}")]
    NotEnoughPrimes { bits: u32, two_n: u64, needed: usize, found: usize },
    #[error("{len} values exceed the {slots} available slots")]
    TooManyValues { len: usize, slots: usize },
    #[error("invalid scale {0}")]
    InvalidScale(f64),
    #[error("scaled plaintext reaches {magnitude:.3e}, beyond half the base prime ({bound:.3e})")]
    ScaleTooLarge { magnitude: f64, bound: f64 },
    #[error("non-finite input value")]
    NonFinite,
    #[error("level {0} is out of range")]
    InvalidLevel(usize),
    #[error("no level left to rescale")]
    LevelExhausted,
    #[error("scales differ: {0} vs {1}")]
    ScaleMismatch(f64, f64),
    #[error("ciphertext has {0} parts, expected 2")]
    PartCount(usize),
    #[error("no Galois key for element {0}")]
    MissingGaloisKey(u64),
    #[error("object belongs to different parameters")]
    ParamsMismatch,
    #[error("malformed encoding: {0}")]
    Deserialize(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
