//! Construction and exact verification of dictatorship gadgets and
//! Unique Games reductions for Feedback Vertex Set and DAG Vertex Deletion,
//! together with the DAG Vertex Deletion to Deadline (discrete time-cost
//! tradeoff) reduction.
//!
//! Everything here is meant for desk-scale instances: graphs are built
//! explicitly, probabilities are computed by enumeration, and every number
//! that matters is an exact rational.

pub mod boolfn;
pub mod digraph;
mod error;
pub mod experiment;
pub mod formats;
pub mod gadget;
pub mod rational;
pub mod reduction;
pub mod solvers;
pub mod timecost;
pub mod unique_games;

pub use error::{Error, Result};
pub use rational::Rational;

/// Default cap on the number of enumerated objects (vertices, table
/// entries, realizations) a single call may create.
pub const DEFAULT_BUDGET: u64 = 1 << 22;
