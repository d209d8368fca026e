//! Cost-sensitive extreme learning machines and discriminant subspaces,
//! with an evolutionary search over per-sample / per-class costs and an
//! evaluation harness for repeated-split experiments.

pub mod bsa;
pub mod config;
pub mod cost;
pub mod dataset;
pub mod elm;
pub mod error;
pub mod eval;
pub mod numerics;
pub mod report;
pub mod runner;
pub mod subspace;

pub use error::{Error, Result};
pub use numerics::{Matrix, Rng, Vector};
