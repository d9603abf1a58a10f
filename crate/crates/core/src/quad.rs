//! Adaptive Gauss-Kronrod quadrature used by the stable-density, section
//! oracle and characteristic-function paths.

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

/// One 15-point Kronrod panel; returns the integral and the QUADPACK-style
/// error estimate (Gauss/Kronrod difference rescaled by the residual mass).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut fv = [0.0f64; 15];
    fv[14] = f_center;
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut resabs = f_center.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Adaptive bisection on `[a, b]` until the accumulated error estimate drops
/// below `abs_tol + rel_tol * |integral|`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = gk15(f, a, b);
    let mut panels = vec![Panel { a, b, value, err }];
    let mut total = value;
    let mut total_err = err;
    while total_err > abs_tol + rel_tol * total.abs() {
        if panels.len() >= max_panels {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {total_err:.3e} \
                 with {} panels",
                panels.len()
            )));
        }
        // Split the worst panel.
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let Panel { a: pa, b: pb, value: pv, err: pe } = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Interval exhausted at f64 resolution; accept its estimate.
            panels.push(Panel { a: pa, b: pb, value: pv, err: 0.0 });
            total_err -= pe;
            continue;
        }
        let (v1, e1) = gk15(f, pa, mid);
        let (v2, e2) = gk15(f, mid, pb);
        total += v1 + v2 - pv;
        total_err += e1 + e2 - pe;
        panels.push(Panel { a: pa, b: mid, value: v1, err: e1 });
        panels.push(Panel { a: mid, b: pb, value: v2, err: e2 });
    }
    Ok(panels.iter().map(|p| p.value).sum())
}

/// Integral of `f` over `[0, inf)` for integrands that eventually decay.
///
/// Panels start at width `scale` and grow geometrically up to `max_width`
/// (a finite cap keeps oscillatory integrands resolved); integration stops
/// once `tail_bound(t)` (a certified bound on the remaining mass beyond `t`)
/// falls under the tolerance. Each panel is resolved adaptively.
pub fn half_line<F, B>(
    f: &F,
    scale: f64,
    abs_tol: f64,
    tail_bound: B,
    max_panels: usize,
    max_width: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    assert!(scale > 0.0 && abs_tol > 0.0);
    let mut total = 0.0;
    let mut t = 0.0;
    let mut width = scale.min(max_width);
    let panel_tol = abs_tol / 8.0;
    for i in 0..max_panels {
        let next = t + width;
        total += adaptive(f, t, next, panel_tol, 1e-12, 1 << 12)?;
        t = next;
        if tail_bound(t) < abs_tol {
            return Ok(total);
        }
        if i >= 4 {
            width = (width * 1.4).min(max_width);
        }
    }
    Err(Error::NonConvergence(format!(
        "half-line quadrature: tail bound still {:.3e} at t = {t:.3e}",
        tail_bound(t)
    )))
}
