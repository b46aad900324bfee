//! Goal-oriented adaptive stochastic Galerkin finite elements for elliptic
//! problems with affine-parametric diffusion coefficients.
//!
//! The crate provides P1 discretizations on adaptively refined triangulations,
//! orthonormal polynomial chaos in the parameters, a two-level a posteriori
//! error estimate, and the adaptive loop combining primal and dual estimates.

pub mod adapt;
pub mod assembly;
pub mod chaos;
pub mod error;
pub mod estimator;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
