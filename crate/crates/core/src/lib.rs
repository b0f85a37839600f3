//! Distributed inexact augmented-Lagrangian methods for consensus
//! optimization over networks: graph and mixing-matrix construction, local
//! costs, local prox solvers, the four primal-dual variants, rate
//! certificates and an experiment harness.

pub mod almethods;
pub mod error;
pub mod exec;
pub mod harness;
pub mod linalg;
pub mod local_solve;
pub mod network;
pub mod objective;
pub mod theory;

pub use error::{Error, Result};
pub use exec::Execution;
