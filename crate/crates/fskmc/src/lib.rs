//! Parallel lattice kinetic Monte Carlo with fractional-step splitting.
//!
//! The lattice is decomposed into two-colored cells; within a macro window
//! each color group advances by exact stochastic simulation while the other
//! is frozen, and the groups alternate according to a splitting schedule
//! (Lie, Strang, or randomized). Cells of the active color run in parallel
//! with deterministic, worker-count-independent results.
//!
//! Small systems double as their own oracle: the exact generator is
//! assembled from the same model code and exponentiated, which is what the
//! verification battery compares simulation output against.

pub mod balance;
pub mod config;
pub mod error;
pub mod executor;
pub mod lattice;
pub mod models;
pub mod kernel;
pub mod generator;
pub mod harness;
pub mod observables;
pub mod ising_exact;
pub mod output;
pub mod partition;
pub mod schedule;
pub mod seeds;

pub use error::{Error, Result};
