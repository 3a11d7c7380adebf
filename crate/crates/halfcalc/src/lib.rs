//! Numerical workbench for functions of generators of exponentially stable
//! semigroups: a Toeplitz/output-mapping construction, a Phillips integral,
//! a half-plane contour calculus and a spectral oracle, cross-validated
//! against each other, plus observability and Riesz-sequence diagnostics.

pub mod calculus;
pub mod config;
pub mod error;
pub mod functions;
pub mod linalg;
pub mod observability;
pub mod parallel;
pub mod report;
pub mod riesz;
pub mod semigroup;
pub mod toeplitz;

pub use error::{HalfcalcError, Result};
