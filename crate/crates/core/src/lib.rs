//! Numerical laboratory for volumes of random sections of `l_p^n` balls.
//!
//! The crate has three layers:
//!
//! * closed forms ([`specfun`]): gamma-based ball volumes, moments of
//!   one-sided stable laws and their square-root-weighted variants, and the
//!   asymptotic constants `(a, b, sigma^2)` of the section-volume central
//!   limit theorems;
//! * exact machinery ([`sampling`], [`geometry`], [`estimators`], [`ustat`],
//!   [`edgeworth`]): stable and weighted-mixture samplers, Haar subspaces,
//!   Cauchy-Binet coefficient extraction, the two volume estimators
//!   (determinant Monte Carlo and characteristic-function quadrature),
//!   the order-(2d-1) U-statistic kernel, and Edgeworth density corrections;
//! * experiments ([`experiments`]): replicated Monte Carlo harnesses that
//!   compare normalized section-volume statistics against the predicted
//!   Gaussian limits.
//!
//! Everything downstream of a seed is deterministic: replicas draw from
//! splittable counter-based streams, so reports are byte-identical across
//! thread counts.

pub mod edgeworth;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod sampling;
pub mod specfun;
pub mod stats;
pub mod ustat;

mod quad;

pub use error::{Error, Result};
pub use specfun::PNorm;
