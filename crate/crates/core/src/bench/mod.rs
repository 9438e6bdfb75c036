//! Experiment runner, report emitters and the batch suite driver.

mod config;
mod report;
mod runner;
mod suite;

pub use config::*;
pub use report::*;
pub use runner::*;
pub use suite::*;
