//! Parallel transport of quantum states over the Siegel upper half-space.
//!
//! Sections of the quantum bundle over 𝔥ₙ are kept in closed Gaussian form
//! in a chosen frame, so transport, projections and the boundary transforms
//! all reduce to finite-dimensional Gaussian integrals. An independent
//! Gauss–Hermite quadrature oracle checks those integrals.

pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod quadrature;
pub mod sections;
pub mod siegel;
pub mod sympl;
pub mod transforms;
pub mod transport;

pub use error::{Error, Result};
