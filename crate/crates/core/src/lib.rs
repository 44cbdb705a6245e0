//! Minimal spectral gap of the adiabatic algorithm for 3-SAT driven by a
//! projector initial Hamiltonian.
//!
//! The pipeline is
//!
//! 1. build or load a [`SatInstance`] ([`instances`]),
//! 2. enumerate all `2^n` assignments into a [`DegeneracySpectrum`]
//!    ([`spectrum`]),
//! 3. solve the `(D+1)`-dimensional symmetric-sector Hamiltonian
//!    `diag(eps) - rho * x x^T` numerically ([`reduced`]), or evaluate the
//!    closed-form gap from the moments of the spectrum ([`analytic`]),
//! 4. optionally cross-check everything against dense diagonalization of the
//!    full `2^n x 2^n` Hamiltonian ([`oracle`]).
//!
//! All floating-point code is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! accuracy targets assume. Exact rational arithmetic is used for the
//! closed-form binomial moments.

pub mod analytic;
pub mod dense;
mod error;
pub mod format;
pub mod hypergeom;
pub mod instances;
pub mod minimize;
pub mod oracle;
pub mod reduced;
pub mod scalar;
pub mod spectrum;

pub use error::{DimacsError, Error, Result};
pub use instances::{Assignment, Clause, Ensemble, Literal, Metadata, SatInstance};
pub use reduced::GapMethod;
pub use scalar::Real;
pub use spectrum::{DegeneracySpectrum, EnumerationConfig};

pub type HamiltonianParams = reduced::HamiltonianParams<f64>;
pub type ReducedHamiltonian = reduced::ReducedHamiltonian<f64>;
pub type GapResult = reduced::GapResult<f64>;
pub type MomentSet = analytic::MomentSet<f64>;
pub type ClosedFormGap = analytic::ClosedFormGap<f64>;
pub type LineValues = analytic::LineValues<f64>;
pub type FullHamiltonian = oracle::FullHamiltonian<f64>;
pub type DecompositionReport = oracle::DecompositionReport<f64>;
