//! Experiment harness, file handling, and CLI for the `bprb-core` toolkit:
//! dataset generation, exact labeling, predictor training, batch solving
//! with every method, fixing-fraction sweeps, and summary reporting.

pub mod clock;
pub mod config;
pub mod files;
pub mod harness;
