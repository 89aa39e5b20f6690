//! Numerical laboratory for dimensional Brunn-Minkowski concavity of
//! log-concave measures.

pub mod acceptance;
pub mod bodies;
pub mod error;
pub mod inequalities;
pub mod integrals;
pub mod localform;
pub mod measures;
pub mod search;

pub use error::{GzError, Result};
