//! Numerical laboratory for the edge of the Gaussian β-ensemble.
//!
//! The crate connects three views of the same object:
//!
//! * finite-N tridiagonal ensembles and the characteristic-polynomial
//!   transfer recurrence ([`gbe`]),
//! * the stochastic Airy equation, its Volterra kernel and the Riccati
//!   diffusion whose blow-downs count eigenvalues ([`sae`], [`riccati`]),
//! * the stochastic Airy function `SAi` and the coupling that matches the
//!   rescaled characteristic polynomial to it on shared noise ([`sai`],
//!   [`edgecouple`]).
//!
//! Every sampler consumes a [`rng::Seed`] and is a pure function of it, so
//! all results — including the statistical acceptance gates in
//! [`acceptance`] — are reproducible bit for bit at a fixed worker count or
//! any other.

pub mod acceptance;
pub mod airy;
pub mod edgecouple;
pub mod eigen;
pub mod gbe;
pub mod riccati;
pub mod rng;
pub mod sae;
pub mod sai;
pub mod stats;

use thiserror::Error;

/// Crate-wide error type: domain violations and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid mismatch: {0}")]
    Grid(String),
    #[error("numerical failure: {0}")]
    Numerics(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
