//! Table-based exact sampler for the mixing variable W with density
//! proportional to `t^(-1/2) g_alpha(t)`.
//!
//! Rejection from `g_alpha` has no finite envelope constant because the
//! weight `t^(-1/2)` is unbounded near zero, so the sampler tabulates the
//! CDF instead. Integrating the Zolotarev representation of `g_alpha` in the
//! radial variable first gives the distribution function as a single
//! integral,
//!
//! `F(t) = (Gamma(1+v) / (pi Z)) ∫_0^pi A(phi)^(-v)
//!         Q(1+v, A(phi) t^(-alpha/(1-alpha))) dphi`,
//!
//! with `v = (1-alpha)/(2 alpha)`, `Q` the regularized upper incomplete
//! gamma and `Z = E Y^(-1/2)` the closed-form normalization, so CDF values
//! at the knots telescope exactly.
//!
//! The table stores `F` as a monotone cubic Hermite interpolant in `ln t`
//! with exact pointwise slopes `dF/d ln t = t . density(t)`; draws invert a
//! panel with safeguarded Newton. Interpolating the forward CDF (rather
//! than the quantile) keeps the panel error proportional to the local mass,
//! which is what certification against fresh CDF evaluations requires.
//! Beyond the grid the upper tail is inverted exactly through the
//! Pareto-type survival with exponent `-(1/2 + alpha)`.

use crate::error::{Error, Result};
use crate::quad;
use crate::sampling::stable::{ln_zolotarev, stable_pdf, tail_constant};
use crate::sampling::RngStream;
use crate::specfun::{ln_gamma, stable_moment};
use crate::stats::gamma_q;

#[derive(Debug, Clone)]
pub struct WSamplerTable {
    alpha: f64,
    accuracy: f64,
    /// Knot log-abscissae, strictly increasing.
    x: Vec<f64>,
    /// CDF at the knots, strictly increasing within (0, 1).
    cdf: Vec<f64>,
    /// Per-panel Hermite slope data in s-units (already limited for
    /// monotonicity): contributions `dF/ds` at the panel ends.
    slope_lo: Vec<f64>,
    slope_hi: Vec<f64>,
    /// Closed-form normalization `Z = E Y^(-1/2)`.
    norm_z: f64,
    /// Survival mass beyond the last knot.
    tail_mass: f64,
    /// Survival exponent `1/2 + alpha`.
    tail_exponent: f64,
    /// Defect `|F(t_hi) + pareto_tail - 1|` before renormalization.
    consistency_residual: f64,
}

fn hermite_eval(f0: f64, f1: f64, d0: f64, d1: f64, s: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let value = (2.0 * s3 - 3.0 * s2 + 1.0) * f0
        + (s3 - 2.0 * s2 + s) * d0
        + (-2.0 * s3 + 3.0 * s2) * f1
        + (s3 - s2) * d1;
    let deriv = (6.0 * s2 - 6.0 * s) * f0
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (-6.0 * s2 + 6.0 * s) * f1
        + (3.0 * s2 - 2.0 * s) * d1;
    (value, deriv)
}

impl WSamplerTable {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn norm_z(&self) -> f64 {
        self.norm_z
    }

    pub fn knot_count(&self) -> usize {
        self.x.len()
    }

    pub fn consistency_residual(&self) -> f64 {
        self.consistency_residual
    }

    /// Interpolated CDF inside panel `k` at relative position `s`, with its
    /// s-derivative.
    fn panel_cdf(&self, k: usize, s: f64) -> (f64, f64) {
        hermite_eval(
            self.cdf[k],
            self.cdf[k + 1],
            self.slope_lo[k],
            self.slope_hi[k],
            s,
        )
    }

    /// Quantile function: panel-local Newton inversion of the monotone
    /// cubic CDF, exact Pareto inversion in the upper tail, clamped at the
    /// lowest knot (which sits below the 1e-10 quantile).
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        let last = self.cdf.len() - 1;
        if u >= self.cdf[last] {
            let survival = 1.0 - u;
            return (self.x[last]
                - (survival / self.tail_mass).ln() / self.tail_exponent)
                .exp();
        }
        if u <= self.cdf[0] {
            return self.x[0].exp();
        }
        let k = match self.cdf.binary_search_by(|f| f.partial_cmp(&u).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let k = k.min(last - 1);
        // Safeguarded Newton on the panel cubic.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let df = self.cdf[k + 1] - self.cdf[k];
        let mut s = (u - self.cdf[k]) / df;
        for _ in 0..40 {
            let (value, deriv) = self.panel_cdf(k, s);
            let err = value - u;
            if err > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            if err.abs() < 1e-16 {
                break;
            }
            let step = if deriv > 0.0 { err / deriv } else { 0.0 };
            let next = s - step;
            s = if next <= lo || next >= hi {
                0.5 * (lo + hi)
            } else {
                next
            };
            if hi - lo < 1e-15 {
                break;
            }
        }
        (self.x[k] + s * (self.x[k + 1] - self.x[k])).exp()
    }

    /// Normalized density `t^(-1/2) g_alpha(t) / Z`, evaluated fresh by
    /// quadrature (not via the table).
    pub fn density(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            t.powf(-0.5) * stable_pdf(self.alpha, t) / self.norm_z
        }
    }
}

/// One inverse-CDF draw of W.
pub fn sample_w(table: &WSamplerTable, s: &mut RngStream) -> f64 {
    table.quantile(s.uniform())
}

/// CDF of W as a single integral over the Zolotarev angle (module docs).
fn cdf_w_raw(alpha: f64, nu: f64, ln_gamma_nu1: f64, z: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let r_t = t.powf(-alpha / (1.0 - alpha));
    let f = |phi: f64| {
        let la = ln_zolotarev(alpha, phi);
        let a = la.exp();
        let x = a * r_t;
        if !(x < 5000.0) {
            // Q underflows to zero far in the upper range.
            return 0.0;
        }
        let factor = (-nu * la).exp();
        if factor == 0.0 {
            return 0.0;
        }
        factor * gamma_q(1.0 + nu, x)
    };
    let integral = quad::adaptive(&f, 0.0, std::f64::consts::PI, 1e-13, 1e-12, 1 << 16)
        .expect("angular quadrature for the W distribution failed");
    ln_gamma_nu1.exp() / (std::f64::consts::PI * z) * integral
}

/// Per-panel monotone limiting of the exact endpoint slopes (in s-units).
fn limited_slopes(df: f64, d0: f64, d1: f64) -> (f64, f64) {
    debug_assert!(df > 0.0 && d0 >= 0.0 && d1 >= 0.0);
    let a = d0 / df;
    let b = d1 / df;
    let s = a * a + b * b;
    if s > 9.0 {
        let tau = 3.0 / s.sqrt();
        (tau * a * df, tau * b * df)
    } else {
        (d0, d1)
    }
}

/// Builds the CDF table to the requested accuracy (absolute, in CDF units).
pub fn build_w_table(alpha: f64, accuracy: f64) -> Result<WSamplerTable> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    if !(1e-12..=1e-4).contains(&accuracy) {
        return Err(Error::InvalidParameter(format!(
            "table accuracy must lie in [1e-12, 1e-4], got {accuracy}"
        )));
    }

    let z = stable_moment(alpha, -0.5)?;
    let nu = (1.0 - alpha) / (2.0 * alpha);
    let lg = ln_gamma(1.0 + nu);
    let cdf_w = |t: f64| cdf_w_raw(alpha, nu, lg, z, t);
    // dF/d ln t = t * w(t).
    let slope_ln = |x: f64| {
        let t = x.exp();
        t * t.powf(-0.5) * stable_pdf(alpha, t) / z
    };

    // Lower cutoff: walk down until the mass below is negligible. The decay
    // exponent heuristic seeds the scan near the right region.
    let left_target = (accuracy * 1e-2).min(1e-10);
    let om = 1.0 - alpha;
    let a0 = om * alpha.powf(alpha / om);
    let mut t_lo = (a0 / 25.0).powf(om / alpha);
    let mut guard = 0;
    while cdf_w(t_lo) > left_target {
        t_lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            return Err(Error::NonConvergence(
                "could not locate a negligible-mass lower cutoff for the W table".into(),
            ));
        }
    }

    // Upper cutoff from the exact power tail of the stable density:
    // survival(t) ~ K t^(-(1/2+alpha)).
    let tail_exponent = 0.5 + alpha;
    let k_tail = tail_constant(alpha) / (z * tail_exponent);
    let q_hi = 0.5 * accuracy.min(1e-8);
    let t_hi = (k_tail / q_hi).powf(1.0 / tail_exponent);
    let tail_mass = k_tail * t_hi.powf(-tail_exponent);

    // Log-spaced knots with exact CDF and slope values.
    let k0 = 640usize;
    let x_lo = t_lo.ln();
    let x_hi = t_hi.ln();
    let step = (x_hi - x_lo) / (k0 - 1) as f64;
    let x: Vec<f64> = (0..k0).map(|i| x_lo + step * i as f64).collect();
    let mut f: Vec<f64> = x.iter().map(|&v| cdf_w(v.exp())).collect();

    let f_end = f[k0 - 1];
    let consistency_residual = (f_end + tail_mass - 1.0).abs();
    if consistency_residual > accuracy {
        return Err(Error::NonConvergence(format!(
            "W table mass defect {consistency_residual:.3e} exceeds accuracy {accuracy:.1e} \
             (alpha = {alpha})"
        )));
    }
    // Force total mass to exactly one.
    let scale = (1.0 - tail_mass) / f_end;
    for v in f.iter_mut() {
        *v *= scale;
    }

    // Drop flat panels (numerically empty extremes) so the CDF is strictly
    // increasing.
    let keep: Vec<usize> = {
        let mut keep = vec![0usize];
        for i in 1..k0 {
            if f[i] - f[*keep.last().unwrap()] > 1e-17 {
                keep.push(i);
            }
        }
        keep
    };
    let mut x: Vec<f64> = keep.iter().map(|&i| x[i]).collect();
    let mut f: Vec<f64> = keep.iter().map(|&i| f[i]).collect();
    let mut d: Vec<f64> = x.iter().map(|&v| slope_ln(v) * scale).collect();

    let assemble = |x: &[f64], f: &[f64], d: &[f64]| -> WSamplerTable {
        let mut slope_lo = Vec::with_capacity(x.len() - 1);
        let mut slope_hi = Vec::with_capacity(x.len() - 1);
        for k in 0..x.len() - 1 {
            let h = x[k + 1] - x[k];
            let df = f[k + 1] - f[k];
            let (lo, hi) = limited_slopes(df, d[k] * h, d[k + 1] * h);
            slope_lo.push(lo);
            slope_hi.push(hi);
        }
        WSamplerTable {
            alpha,
            accuracy,
            x: x.to_vec(),
            cdf: f.to_vec(),
            slope_lo,
            slope_hi,
            norm_z: z,
            tail_mass,
            tail_exponent,
            consistency_residual,
        }
    };

    // Refinement: certify the interpolant against fresh CDF evaluations at
    // panel midpoints; insertion is panel-local because slopes are exact
    // pointwise data.
    let mut dirty = vec![true; x.len() - 1];
    for _round in 0..40 {
        let table = assemble(&x, &f, &d);
        let mut inserts: Vec<(usize, f64, f64, f64)> = Vec::new();
        for k in 0..x.len() - 1 {
            if !dirty[k] {
                continue;
            }
            dirty[k] = false;
            let x_mid = 0.5 * (x[k] + x[k + 1]);
            let f_true = cdf_w(x_mid.exp()) * scale;
            let (f_interp, _) = table.panel_cdf(k, 0.5);
            if (f_true - f_interp).abs() > 0.5 * accuracy {
                inserts.push((k, x_mid, f_true, slope_ln(x_mid) * scale));
            }
        }
        if inserts.is_empty() {
            return Ok(table);
        }
        for (k, xm, fm, dm) in inserts.into_iter().rev() {
            x.insert(k + 1, xm);
            f.insert(k + 1, fm);
            d.insert(k + 1, dm);
            dirty[k] = true;
            dirty.insert(k + 1, true);
        }
    }
    Err(Error::NonConvergence(format!(
        "W table interpolation did not reach accuracy {accuracy:.1e} after refinement \
         (alpha = {alpha})"
    )))
}
