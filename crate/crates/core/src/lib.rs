//! Chaotic extreme learning machines over plaintext and CKKS-encrypted data.

pub mod bench;
pub mod chaos;
pub mod data;
pub mod elm;
pub mod error;
pub mod pipeline;

pub use error::{CoreError, Result};
