//! Numerical toolkit for projectively flat Finsler metrics of constant flag curvature.
//!
//! Everything is generic over the scalar type ([`Real`]); `f64` aliases live at the crate root.

pub mod analysis;
pub mod closed;
pub mod descriptor;
pub mod diff;
pub mod error;
pub mod funk;
pub mod geometry;
pub mod homogeneous;
pub mod linalg;
pub mod metrics;
pub mod quad;
pub mod sampling;
pub mod scalar;
pub mod sphere;
pub mod tensor;
pub mod vecops;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Real;

pub type HomogeneousFn = homogeneous::HomogeneousFn<f64>;
pub type MinkowskiNorm = homogeneous::MinkowskiNorm<f64>;
pub type FunkSolution = funk::FunkSolution<f64>;
pub type SignedSolver = funk::SignedSolver<f64>;
pub type FinslerMetric = metrics::FinslerMetric<f64>;
pub type DomainSpec = metrics::DomainSpec<f64>;
pub type ClosedKind = closed::ClosedKind<f64>;
pub type FundamentalTensor = tensor::FundamentalTensor<f64>;
pub type DomainScan = tensor::DomainScan<f64>;
