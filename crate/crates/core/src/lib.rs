//! Magnetic Gabor-Parseval frames and magnetic pseudodifferential (super)
//! operators on discretized phase space.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: grids, sampled fields, symplectic forms and Fourier transforms.
//! - [`magnetics`]: polynomial vector potentials, fields and line-integral phases.
//! - [`frame`]: the magnetic Gabor frame, analysis, synthesis and Parseval checks.
//! - [`weyl`]: Weyl system, quantization, dequantization and dense operator kernels.
//! - [`matrixrep`]: frame matrix elements of operators and super operators.
//! - [`superweyl`]: double symbols, Schmidt decompositions and super quantization.
//! - [`bounds`]: Schur test, decay tables and boundedness experiments.
//!
//! All transforms are normalised so that they are exact involutions on the grid,
//! and all quadrature uses the uniform weight `h^d`.

pub mod bounds;
pub mod error;
pub mod frame;
pub mod geometry;
pub mod io;
pub mod magnetics;
pub mod matrixrep;
pub mod superweyl;
pub mod weyl;

pub use error::{Error, Result};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
