//! Exact scalars, vectors and matrices over ℚ.

mod matrix;
mod rational;
mod vector;

pub use matrix::{complement_basis, kernel, rank, rank_of_vectors, solve_linear_system, QMatrix};
pub use rational::{q, ParseRationalError, Rational};
pub use vector::{qv, QVector};
