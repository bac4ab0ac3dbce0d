//! Quadratic correlation witnesses for separable, bosonic, Slater and
//! fermionic Gaussian pure-state classes, and Monte Carlo estimates of how
//! often they fire on isospectral orbits of density matrices.

pub mod cli;
pub mod error;
pub mod estimation;
pub mod io;
pub mod linalg;
pub mod operators;
pub mod sampling;
pub mod selftest;
pub mod spaces;
pub mod witness;

pub use error::{Error, Result};
