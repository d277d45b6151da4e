//! Experiment harness for `efdt-core`: CSV streams, prequential evaluation,
//! paired learner comparison, the batch-convergence check and the `efdt`
//! command line.

pub mod cli;
pub mod convergence;
pub mod csv_io;
mod error;
pub mod eval;

pub use error::{Error, Result};
