//! Fourier-method spectral computations for Hill operators −y″ + v·y with
//! singular π-periodic potentials v = Q′.

pub mod acceptance;
pub mod cli;
pub mod error;
pub mod floquet_oracle;
pub mod linalg;
pub mod operator_matrix;
pub mod potential;
pub mod quadrature;
pub mod riesz_projection;
pub mod schmidt_reduction;
pub mod sequence_analysis;
pub mod spectral_pairing;

pub use error::{Error, Result};
pub use linalg::C64;
