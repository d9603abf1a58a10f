//! Exact sampling from the normalized generalized Gaussian with density
//! `exp(-beta_p^p |x|^p)`, `beta_p = 2 Gamma(1+1/p)`.
//!
//! `|X| = U^(1/p) / beta_p` with `U ~ Gamma(1/p, 1)` and an independent
//! uniform sign: substituting `u = (beta x)^p` in the gamma density gives
//! exactly the target law.

use crate::sampling::RngStream;
use crate::specfun::{pgauss_beta, PNorm};

pub fn sample_pgauss(p: PNorm, s: &mut RngStream) -> f64 {
    let pv = p.value();
    assert!(pv.is_finite(), "generalized Gaussian requires finite p");
    let beta = pgauss_beta(p).expect("finite p");
    let u = s.gamma(1.0 / pv);
    let magnitude = u.powf(1.0 / pv) / beta;
    if s.uniform() < 0.5 {
        -magnitude
    } else {
        magnitude
    }
}
