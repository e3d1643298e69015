//! Benchmark harness for the adaptive shot-allocation optimizers: task
//! construction, seeded runs, trace serialization, sweeps, and median-curve
//! summaries.

pub mod error;
pub mod runner;
pub mod seeds;
pub mod summary;
pub mod task;
pub mod trace_io;

pub use error::CliError;
