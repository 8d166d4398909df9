//! Experiment runner for `molekom-core`: JSON scenario files, CSV/JSON
//! result files, and thread-parallel Monte Carlo drivers whose output is
//! identical at any thread count.

pub mod config;
pub mod error;
pub mod experiments;
pub mod format;
pub mod parallel;

pub use config::{Config, EXPERIMENTS};
pub use error::{Result, RunError};
pub use experiments::Output;
