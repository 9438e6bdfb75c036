//! Dataset manifests, loading and preprocessing.

mod loader;
mod preprocess;
mod schema;

pub use loader::*;
pub use preprocess::*;
pub use schema::*;
