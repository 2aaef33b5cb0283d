//! Large-N equilibrium measure of the sinh-Gordon log-gas.
//!
//! The pipeline runs TBA input -> Wiener-Hopf factors -> leading parametrix ->
//! endpoints and density, with brute-force oracles in [`oracle`] to check the
//! analytic side.

pub mod cli;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod gamma;
pub mod model;
pub mod oracle;
pub mod parametrix;
pub mod quad;
pub mod tba;
pub mod wiener_hopf;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
