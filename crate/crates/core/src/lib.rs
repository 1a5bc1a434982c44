//! Numerical evaluation of SL(n)-invariant Minkowski valuations on explicit
//! convex bodies.

pub mod bodies;
pub mod classical;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod quad;
pub mod rep_theory;
pub mod semicont;
pub mod symtensor;
pub mod tensor_val;

pub use error::{Error, Result};
