//! Exact random-variate generation: one-sided stable variables, the
//! square-root-weighted mixing variable W, generalized Gaussians, standard
//! normals, and Haar-distributed subspace bases, all driven by splittable
//! deterministic streams.

mod haar;
mod pgauss;
pub(crate) mod stable;
mod stream;
mod wtable;

pub use haar::sample_haar_basis;
pub use pgauss::sample_pgauss;
pub use stable::{sample_positive_stable, stable_cdf, stable_pdf};
pub use stream::RngStream;
pub use wtable::{build_w_table, sample_w, WSamplerTable};
