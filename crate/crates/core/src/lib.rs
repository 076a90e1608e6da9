//! Core toolkit for finding good feasible solutions to binary integer
//! programs quickly: a sparse program model with binarization and
//! normalization transforms, seeded benchmark-instance generators, a
//! variable–constraint bipartite graph encoding with static features, a
//! trainable message-passing predictor, sound prediction-guided problem
//! reduction, and prediction-guided depth-first search plus an exact
//! branch-and-bound oracle.
//!
//! The crate is `no_std` (with `alloc`); file handling, the CLI, and wall
//! clocks live in the companion `bprb` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bigraph;
mod fx;
pub mod gcn;
pub mod gen;
pub mod matrix;
pub mod mip;
pub mod reduction;
pub mod rng;
pub mod search;
pub mod stats;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
