//! Exact polyhedral convex calculus over ℚⁿ.
//!
//! Sets are polyhedra with exact rational data, functionals are vectors
//! under the dot product, and every calculus rule is checked by exact set
//! equality plus definitional LP oracles.

pub mod arith;
pub mod convex;
pub mod error;
pub mod function;
pub mod lp;
pub mod oracle;
pub mod polyhedra;
pub mod setvalued;
pub mod verify;

pub use arith::{q, qv, QMatrix, QVector, Rational};
pub use error::{Error, Result};
