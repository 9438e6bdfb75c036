//! RNS-CKKS approximate homomorphic encryption.
//!
//! Ciphertexts live in transform form over a chain of NTT-friendly primes.
//! Multiplication relinearizes immediately; rescaling is explicit. Rotations
//! are available for power-of-two steps and compose for any other step.

pub mod context;
pub mod encoding;
pub mod encryptor;
pub mod error;
pub mod evaluator;
pub mod keys;
pub mod params;
pub mod ring;
pub mod rns;
pub mod serialize;

pub use context::{build_context, CkksContext};
pub use encoding::{decode, encode, encode_at, encode_constant, encode_with_scale, Plaintext};
pub use encryptor::{decrypt, encrypt, Ciphertext};
pub use error::CkksError;
pub use evaluator::Evaluator;
pub use keys::{keygen, EvaluationKeys, GaloisKeys, KeySet, PublicKey, RelinKey, SecretKey};
pub use params::CkksParams;
