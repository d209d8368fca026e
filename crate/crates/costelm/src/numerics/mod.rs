//! Seeded random number generation and dense linear algebra primitives.

mod linalg;
mod rng;

pub use linalg::{solve_linear, sym_generalized_eig, Matrix, Vector};
pub use rng::Rng;
