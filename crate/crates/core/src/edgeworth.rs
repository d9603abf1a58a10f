//! Edgeworth density corrections specialized to randomly weighted sums:
//! the normalized fourth-cumulant coefficient, the Hermite correction
//! functions, and the order-1/n predictions for the codimension-one volume
//! ratio and the non-central cube section density.

use serde::Serialize;

use crate::error::Result;
use crate::specfun::{hermite, pgauss_cumulants, PNorm};
use crate::stats::normal_pdf;

/// Direction bookkeeping for the expansion: raw Gaussian weights `g_i` and
/// the cumulants of the symmetric base law (odd cumulants vanish).
#[derive(Debug, Clone)]
pub struct EdgeworthInput {
    g: Vec<f64>,
    kappa2: f64,
    kappa4: f64,
    sum_g2: f64,
    sum_g4: f64,
}

impl EdgeworthInput {
    pub fn new(g: Vec<f64>, kappa2: f64, kappa4: f64) -> Self {
        assert!(kappa2 > 0.0, "base law needs positive variance");
        let sum_g2: f64 = g.iter().map(|x| x * x).sum();
        let sum_g4: f64 = g.iter().map(|x| x.powi(4)).sum();
        assert!(sum_g2 > 0.0, "direction must be nonzero");
        EdgeworthInput {
            g,
            kappa2,
            kappa4,
            sum_g2,
            sum_g4,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.g
    }

    /// `sum g_i^4 / (sum g_i^2)^2`, the random fourth-moment ratio whose
    /// fluctuation around 3/n drives the limit theorems.
    pub fn weight_ratio(&self) -> f64 {
        self.sum_g4 / (self.sum_g2 * self.sum_g2)
    }
}

/// Normalized cumulant coefficient
/// `lambda_{k,n} = n^{(k-2)/2} B_n^{-k/2} sum_i kappa_k(g_i Y_i)` for the
/// symmetric base law: zero at odd k, and at k = 4
/// `n (kappa4/kappa2^2) sum g^4 / (sum g^2)^2`.
pub fn lambda_kn(input: &EdgeworthInput, k: u32, n: usize) -> f64 {
    assert!((3..=5).contains(&k), "only k in {{3,4,5}} is used");
    if k % 2 == 1 {
        return 0.0;
    }
    n as f64 * (input.kappa4 / (input.kappa2 * input.kappa2)) * input.weight_ratio()
}

/// Edgeworth correction functions `q_0..q_3` with general (possibly
/// asymmetric) coefficients `lambdas = [lambda_3, lambda_4, lambda_5]`.
pub fn q_kn(x: f64, k: u32, lambdas: &[f64; 3]) -> f64 {
    let phi = normal_pdf(x);
    let [l3, l4, l5] = *lambdas;
    match k {
        0 => phi,
        1 => phi * hermite(3, x) * l3 / 6.0,
        2 => phi * (hermite(4, x) * l4 / 24.0 + hermite(6, x) * l3 * l3 / 72.0),
        3 => {
            phi * (hermite(5, x) * l5 / 120.0
                + hermite(7, x) * l3 * l4 / 144.0
                + hermite(9, x) * l3.powi(3) / 1296.0)
        }
        _ => panic!("q_kn is defined for k <= 3"),
    }
}

/// A density value split into its Gaussian leading term and the relative
/// 1/n-scale correction: `predicted = leading * (1 + correction)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensityPrediction {
    pub leading: f64,
    pub correction: f64,
    pub predicted: f64,
}

impl DensityPrediction {
    fn new(leading: f64, correction: f64) -> Self {
        DensityPrediction {
            leading,
            correction,
            predicted: leading * (1.0 + correction),
        }
    }
}

/// Order-1/n prediction of the codimension-one volume ratio for the
/// direction with raw Gaussian weights `g`:
/// `(2 pi kappa2)^{-1/2} (1 + (1/8)(kappa4/kappa2^2) sum g^4/(sum g^2)^2)`.
pub fn predicted_ratio_d1(p: PNorm, g: &[f64]) -> Result<DensityPrediction> {
    let (kappa2, kappa4) = pgauss_cumulants(p)?;
    let input = EdgeworthInput::new(g.to_vec(), kappa2, kappa4);
    let leading = 1.0 / (2.0 * std::f64::consts::PI * kappa2).sqrt();
    let correction = 0.125 * (kappa4 / (kappa2 * kappa2)) * input.weight_ratio();
    Ok(DensityPrediction::new(leading, correction))
}

/// Same prediction for the cube at offset `x`: uniform[-1,1] base law
/// (`kappa2 = 1/3`, `kappa4 = -2/15`), Gaussian leading term in `x` and the
/// fourth-Hermite correction evaluated at `x/sqrt(kappa2)`.
pub fn predicted_cube_density(x: f64, g: &[f64]) -> DensityPrediction {
    let kappa2 = 1.0 / 3.0;
    let kappa4 = -2.0 / 15.0;
    let input = EdgeworthInput::new(g.to_vec(), kappa2, kappa4);
    let z = x / kappa2.sqrt();
    let leading = normal_pdf(z) / kappa2.sqrt();
    let correction =
        hermite(4, z) / 24.0 * (kappa4 / (kappa2 * kappa2)) * input.weight_ratio();
    DensityPrediction::new(leading, correction)
}
