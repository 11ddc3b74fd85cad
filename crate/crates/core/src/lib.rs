//! Riemann–Hilbert asymptotics for the first colonization of a critical
//! hard edge, with an extended-precision finite-N oracle.
//!
//! The pipeline is `spectral` (critical one-cut potential, g-function,
//! conformal frame) → `micro` (orthogonal polynomials of the microscopic
//! weight) → `parametrix` (Szegő function, outer and local parametrices,
//! partial Schlesinger factor) → `schlesinger` (all-order improvement) →
//! `predict` (zeros and kernels), all checked against `oracle`.

pub mod num;

pub mod config;
pub mod experiment;
pub mod error;
pub mod micro;
pub mod oracle;
pub mod parametrix;
pub mod predict;
pub mod schlesinger;
pub mod spectral;

pub use error::{Error, Result};
