//! formkit: numerical verification of representation identities for
//! sesquilinear forms on finite-dimensional complex Hilbert spaces and on
//! truncated diagonal operator families.
//!
//! The crate is organized as a stack:
//!
//! * [`matrix`] and [`spectral`] supply the dense complex kernels (Hermitian
//!   eigendecomposition, SVD, polar decomposition, PSD square roots).
//! * [`forms`] realizes finite-dimensional sesquilinear forms and checks the
//!   representation, solvability, and correspondence identities.
//! * [`expr`] parses closed-form sequence symbols and plane functions.
//! * [`diagonal`] drives truncation sweeps over diagonal and grid-sampled
//!   multiplication operator families.
//! * [`spec_io`], [`report`], and [`commands`] implement the JSON problem
//!   spec and report formats behind the `formkit` command-line tool.

pub mod commands;
pub mod diagonal;
pub mod error;
pub mod expr;
pub mod forms;
pub mod matrix;
pub mod report;
pub mod sampling;
pub mod spec_io;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use spectral::ToleranceConfig;
