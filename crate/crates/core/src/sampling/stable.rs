//! One-sided alpha-stable variables: exact sampling and pointwise density
//! and distribution functions.
//!
//! `Y` is standard positive alpha-stable when `E exp(-tY) = exp(-t^alpha)`,
//! `alpha in (0,1)`. Sampling uses Kanter's representation
//! `Y = (A(U)/E)^((1-alpha)/alpha)` with `U` uniform on `(0, pi)`, `E` a unit
//! exponential and `A` the Zolotarev auxiliary function. The same
//! representation yields single-integral formulas for the distribution and
//! density, which back the table-based sampler for the weighted variable W.

use crate::error::{Error, Result};
use crate::quad;
use crate::sampling::RngStream;
use crate::specfun::ln_gamma;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "stable index must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// log A(phi) for the Zolotarev function
/// `A(phi) = sin((1-a)phi) sin(a phi)^(a/(1-a)) / sin(phi)^(1/(1-a))`,
/// strictly increasing from `A(0) = (1-a) a^(a/(1-a))` to infinity at `pi`.
pub(crate) fn ln_zolotarev(alpha: f64, phi: f64) -> f64 {
    let om = 1.0 - alpha;
    (om * phi).sin().ln() + alpha / om * (alpha * phi).sin().ln() - phi.sin().ln() / om
}

pub(crate) fn ln_zolotarev_at_zero(alpha: f64) -> f64 {
    let om = 1.0 - alpha;
    om.ln() + alpha / om * alpha.ln()
}

/// One exact draw of a standard positive alpha-stable variable.
pub fn sample_positive_stable(alpha: f64, s: &mut RngStream) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let u = std::f64::consts::PI * s.uniform();
    let e = s.exponential();
    let ln_a = ln_zolotarev(alpha, u);
    ((1.0 - alpha) / alpha * (ln_a - e.ln())).exp()
}

/// Integrand `A(phi) exp(-c A(phi))` guarded against overflow at `phi -> pi`.
fn density_integrand(alpha: f64, c: f64, phi: f64) -> f64 {
    let la = ln_zolotarev(alpha, phi);
    let expo = la - c * la.exp();
    if expo < -745.0 {
        0.0
    } else {
        expo.exp()
    }
}

/// Splits `(0, pi)` at the peak of `A e^{-cA}` (where `A = 1/c`), if interior.
fn peak_location(alpha: f64, c: f64) -> Option<f64> {
    let target = -c.ln();
    if ln_zolotarev_at_zero(alpha) >= target {
        return None;
    }
    let mut lo = 1e-12;
    let mut hi = std::f64::consts::PI - 1e-12;
    if ln_zolotarev(alpha, hi) <= target {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_zolotarev(alpha, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Far-tail series of the density:
/// `g(x) = (1/pi) sum_{k>=1} (-1)^(k+1) (Gamma(k a + 1)/k!) sin(k pi a) x^(-k a - 1)`.
/// Used where the Zolotarev boundary layer is too close to `phi = pi` to
/// resolve; at that point the k = 4 term is already far below f64 rounding.
fn stable_pdf_tail_series(alpha: f64, x: f64) -> f64 {
    let mut total = 0.0;
    let mut k_fact = 1.0;
    for k in 1..=4 {
        let kf = k as f64;
        k_fact *= kf;
        let term = (ln_gamma(kf * alpha + 1.0).exp() / k_fact)
            * (kf * std::f64::consts::PI * alpha).sin()
            * x.powf(-kf * alpha - 1.0);
        total += if k % 2 == 1 { term } else { -term };
    }
    total / std::f64::consts::PI
}

/// Pointwise density `g_alpha(x)` of the standard positive stable law,
/// by quadrature of the Zolotarev representation
/// `g(x) = (a/((1-a) pi)) x^(-1/(1-a)) int_0^pi A(phi) exp(-x^(-a/(1-a)) A(phi)) dphi`.
pub fn stable_pdf(alpha: f64, x: f64) -> f64 {
    check_alpha(alpha).expect("invalid alpha");
    if x <= 0.0 {
        return 0.0;
    }
    let om = 1.0 - alpha;
    let c = x.powf(-alpha / om);
    // The integrand is at most A(0) exp(-c A(0)); below the f64 exponent
    // range the density is exactly zero for all practical purposes.
    if c * ln_zolotarev_at_zero(alpha).exp() > 700.0 {
        return 0.0;
    }
    // Peak of A e^{-cA} unresolvably close to pi: switch to the tail series
    // (the series remainder there is many orders below the target accuracy).
    if -c.ln() > ln_zolotarev(alpha, std::f64::consts::PI - 1e-6) {
        return stable_pdf_tail_series(alpha, x);
    }
    let pi = std::f64::consts::PI;
    let f = |phi: f64| density_integrand(alpha, c, phi);
    let integral = match peak_location(alpha, c) {
        Some(peak) => {
            quad::adaptive(&f, 0.0, peak, 1e-280, 1e-11, 1 << 16)
                .expect("stable density quadrature failed below the peak")
                + quad::adaptive(&f, peak, pi, 1e-280, 1e-11, 1 << 16)
                    .expect("stable density quadrature failed beyond the peak")
        }
        None => quad::adaptive(&f, 0.0, pi, 1e-280, 1e-11, 1 << 16)
            .expect("stable density quadrature failed"),
    };
    alpha / (om * pi) * x.powf(-1.0 / om) * integral
}

/// Distribution function of the standard positive stable law:
/// `F(x) = (1/pi) int_0^pi exp(-x^(-a/(1-a)) A(phi)) dphi`.
pub fn stable_cdf(alpha: f64, x: f64) -> f64 {
    check_alpha(alpha).expect("invalid alpha");
    if x <= 0.0 {
        return 0.0;
    }
    let c = x.powf(-alpha / (1.0 - alpha));
    if c * ln_zolotarev_at_zero(alpha).exp() > 700.0 {
        return 0.0;
    }
    let pi = std::f64::consts::PI;
    let f = |phi: f64| {
        let la = ln_zolotarev(alpha, phi);
        let expo = -c * la.exp();
        if expo < -745.0 {
            0.0
        } else {
            expo.exp()
        }
    };
    // exp(-cA) is monotone in phi; a direct adaptive pass suffices.
    quad::adaptive(&f, 0.0, pi, 1e-14, 1e-12, 1 << 16)
        .expect("stable distribution quadrature failed")
        / pi
}

/// Leading tail constant: `g_alpha(x) ~ (alpha / Gamma(1-alpha)) x^(-1-alpha)`.
pub(crate) fn tail_constant(alpha: f64) -> f64 {
    alpha / ln_gamma(1.0 - alpha).exp()
}

/// Brute-force oracle `int_0^inf t^r g_alpha(t) dt` by log-spaced panels of
/// pointwise density evaluations. Converges for `r < alpha`; used to verify
/// the closed-form moment formulas independently.
#[cfg(test)]
pub(crate) fn weighted_stable_integral(alpha: f64, r: f64) -> f64 {
    assert!(r < alpha);
    let om = 1.0 - alpha;
    let a0 = ln_zolotarev_at_zero(alpha).exp();
    // Below t_lo the density is exponentially negligible.
    let t_lo = (a0 / 60.0).powf(om / alpha);
    // Beyond t_hi use the exact power tail.
    let c_tail = tail_constant(alpha);
    let tail_mass = |t: f64| c_tail * t.powf(r - alpha) / (alpha - r);
    let mut t_hi: f64 = 10.0;
    while tail_mass(t_hi) > 1e-11 {
        t_hi *= 2.0;
        if t_hi > 1e300 {
            break;
        }
    }
    let f = |t: f64| t.powf(r) * stable_pdf(alpha, t);
    let decades = (t_hi / t_lo).log10();
    let panels = (decades * 8.0).ceil() as usize;
    let ratio = (t_hi / t_lo).powf(1.0 / panels as f64);
    let mut total = 0.0;
    let mut a = t_lo;
    for _ in 0..panels {
        let b = a * ratio;
        total += quad::adaptive(&f, a, b, 1e-13, 1e-9, 1 << 10).unwrap_or(0.0);
        a = b;
    }
    total + tail_mass(t_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::stable_moment;
    use crate::stats::{ks_two_sample, ks_two_sample_pvalue};

    #[test]
    fn laplace_transform_matches_definition() {
        // E exp(-tY) = exp(-t^alpha) within Monte Carlo error.
        let n = 1_000_000;
        for &alpha in &[0.25f64, 0.5, 0.75] {
            let mut s = RngStream::new(11, alpha.to_bits());
            let draws: Vec<f64> = (0..n).map(|_| sample_positive_stable(alpha, &mut s)).collect();
            for &t in &[0.25, 0.5, 1.0, 2.0, 4.0] {
                let vals: Vec<f64> = draws.iter().map(|y| (-t * y).exp()).collect();
                let mean = crate::stats::mean(&vals);
                let want = (-t.powf(alpha)).exp();
                let bound = 5.0 / (n as f64).sqrt();
                assert!(
                    (mean - want).abs() < bound,
                    "alpha={alpha}, t={t}: {mean} vs {want}"
                );
            }
        }
    }

    #[test]
    fn half_stable_matches_levy_representation() {
        // At alpha = 1/2 the law is that of 1/(2 Z^2), Z standard normal.
        let n = 100_000;
        let mut s = RngStream::new(5, 0);
        let stable: Vec<f64> = (0..n).map(|_| sample_positive_stable(0.5, &mut s)).collect();
        let mut s2 = RngStream::new(5, 1);
        let levy: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = s2.std_normal();
                1.0 / (2.0 * z * z)
            })
            .collect();
        let d = ks_two_sample(&stable, &levy);
        let p = ks_two_sample_pvalue(d, n, n);
        assert!(p > 0.01, "two-sample KS p-value {p} (d = {d})");
    }

    #[test]
    fn negative_moment_matches_closed_form() {
        let n = 1_000_000;
        let alpha = 0.75;
        let mut s = RngStream::new(17, 3);
        let vals: Vec<f64> = (0..n)
            .map(|_| sample_positive_stable(alpha, &mut s).powf(-0.5))
            .collect();
        let mean = crate::stats::mean(&vals);
        let se = (crate::stats::variance(&vals) / n as f64).sqrt();
        let want = stable_moment(alpha, -0.5).unwrap();
        assert!(
            (mean - want).abs() < 4.0 * se,
            "E Y^(-1/2): {mean} +- {se} vs {want}"
        );
    }

    #[test]
    fn density_integrates_to_one() {
        for &alpha in &[0.25, 0.5, 0.8] {
            let total = weighted_stable_integral(alpha, 0.0);
            assert!(
                (total - 1.0).abs() < 1e-8,
                "alpha={alpha}: total mass {total}"
            );
        }
    }

    #[test]
    fn density_matches_levy_closed_form() {
        // g_{1/2}(x) = x^(-3/2) exp(-1/(4x)) / (2 sqrt(pi)), including far
        // into the series-branch region.
        for &x in &[0.05f64, 0.3, 1.0, 4.0, 50.0, 1e7, 1e12] {
            let want = x.powf(-1.5) * (-0.25 / x).exp() / (2.0 * std::f64::consts::PI.sqrt());
            let got = stable_pdf(0.5, x);
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "g_0.5({x}) = {got} vs {want}"
            );
        }
    }

    #[test]
    fn cdf_matches_levy_closed_form() {
        // F_{1/2}(x) = erfc(1/(2 sqrt(x))).
        for &x in &[0.1f64, 1.0, 10.0] {
            let want = crate::stats::erfc(0.5 / x.sqrt());
            let got = stable_cdf(0.5, x);
            assert!(
                (got - want).abs() < 1e-10,
                "F_0.5({x}) = {got} vs {want}"
            );
        }
    }

    #[test]
    fn moment_oracle_matches_closed_form() {
        for &alpha in &[0.25, 0.5, 0.75] {
            for &q in &[-1.0, -0.5] {
                let got = weighted_stable_integral(alpha, q);
                let want = stable_moment(alpha, q).unwrap();
                assert!(
                    ((got - want) / want).abs() < 1e-8,
                    "E Y^{q} at alpha={alpha}: {got} vs {want}"
                );
            }
        }
    }
}
