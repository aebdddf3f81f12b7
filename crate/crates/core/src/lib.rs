//! Harmonic cohomology generators of simplicial complexes built on 3D point
//! clouds, metric spaces over those generators, their subdominant
//! ultrametrics, and the Gromov-Hausdorff ultrametric between them.
//!
//! The usual flow is [`ingest`] → [`complex`] → [`hodge`] → [`genmetric`] →
//! [`ultra`], with [`pipeline`] wiring everything into feature matrices,
//! k-means and adjusted Rand index evaluation.

pub mod complex;
pub mod error;
pub mod genmetric;
pub mod hodge;
pub mod ingest;
pub mod pipeline;
pub mod ultra;

pub use error::{Error, ErrorClass, Result};
