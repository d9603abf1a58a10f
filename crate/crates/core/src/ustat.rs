//! The U-statistic layer behind the general-codimension CLT: the symmetric
//! determinant kernel of order `2d-1`, its Hoeffding projections, the
//! closed-form parameter triple, and the exact algebraic identity relating
//! the squared-minor pair sum to the kernel sum over raw Gaussian columns.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, cauchy_binet_coeffs, det_dense, factorial, SubspaceBasis};
use crate::sampling::RngStream;
use crate::specfun::{w_moment, PNorm};

/// Input to the order-(2d-1) kernel: `2d-1` points in `R^d`.
#[derive(Debug, Clone)]
pub struct KernelInput {
    pub d: usize,
    pub points: Vec<Vec<f64>>,
}

impl KernelInput {
    pub fn new(d: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() != 2 * d - 1 || points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidParameter(format!(
                "kernel of order {} needs {} points of dimension {d}",
                2 * d - 1,
                2 * d - 1
            )));
        }
        Ok(KernelInput { d, points })
    }
}

fn det_of_points(points: &[&[f64]], d: usize) -> f64 {
    let mut m = vec![0.0f64; d * d];
    for (c, p) in points.iter().enumerate() {
        for r in 0..d {
            m[r * d + c] = p[r];
        }
    }
    det_dense(&mut m, d)
}

/// Symmetric kernel
/// `h(x_1..x_{2d-1}) = (1/(2d-1)!) sum_k sum_{J} det({x_k} ∪ x_J)^2
///  det({x_k} ∪ x_{J^c})^2` over `(d-1)`-subsets `J` of the other indices.
pub fn kernel_h(input: &KernelInput) -> f64 {
    let d = input.d;
    let order = 2 * d - 1;
    let mut total = 0.0;
    let mut left: Vec<&[f64]> = Vec::with_capacity(d);
    let mut right: Vec<&[f64]> = Vec::with_capacity(d);
    for k in 0..order {
        let others: Vec<usize> = (0..order).filter(|&i| i != k).collect();
        for subset in others.iter().copied().combinations(d - 1) {
            left.clear();
            left.push(&input.points[k]);
            for &j in &subset {
                left.push(&input.points[j]);
            }
            right.clear();
            right.push(&input.points[k]);
            for &j in &others {
                if !subset.contains(&j) {
                    right.push(&input.points[j]);
                }
            }
            let dl = det_of_points(&left, d);
            let dr = det_of_points(&right, d);
            total += dl * dl * dr * dr;
        }
    }
    total / factorial(order)
}

/// Closed form of the first Hoeffding projection:
/// `pi_1 h(g) = ((2d-2)(d+2)(|g|^2 - d) + (|g|^4 - 3d - d(d-1))) / (2d-1)`.
pub fn pi1_h_closed(d: usize, gamma: &[f64]) -> f64 {
    assert_eq!(gamma.len(), d);
    let df = d as f64;
    let norm2: f64 = gamma.iter().map(|g| g * g).sum();
    ((2.0 * df - 2.0) * (df + 2.0) * (norm2 - df)
        + (norm2 * norm2 - 3.0 * df - df * (df - 1.0)))
        / (2.0 * df - 1.0)
}

/// Closed-form parameter triple
/// `(E h, Var(pi_1 h), Cov(pi_1 h, |G|^2 - d))`:
/// `((d+2)d, (8d^3(d+2)^2 + 24d + 4d(d-1))/(2d-1)^2, 4d^2(d+2)/(2d-1))`.
pub fn closed_form_targets(d: usize) -> (f64, f64, f64) {
    let df = d as f64;
    let eh = (df + 2.0) * df;
    let denom = (2.0 * df - 1.0) * (2.0 * df - 1.0);
    let var = (8.0 * df.powi(3) * (df + 2.0).powi(2) + 24.0 * df + 4.0 * df * (df - 1.0)) / denom;
    let cov = 4.0 * df * df * (df + 2.0) / (2.0 * df - 1.0);
    (eh, var, cov)
}

fn fresh_point(d: usize, s: &mut RngStream) -> Vec<f64> {
    (0..d).map(|_| s.std_normal()).collect()
}

/// Monte Carlo evaluation of the k-th Hoeffding projection at fixed points:
/// inclusion-exclusion `pi_k h = sum_{S ⊆ [k]} (-1)^{k-|S|} E h(fixed_S, ...)`
/// with the remaining slots integrated over `m` fresh Gaussian draws.
pub fn hoeffding_projection_mc(
    d: usize,
    k: usize,
    fixed: &[Vec<f64>],
    m: u64,
    s: &mut RngStream,
) -> f64 {
    let order = 2 * d - 1;
    assert!(k <= order, "projection order k = {k} exceeds {order}");
    assert_eq!(fixed.len(), k);
    let subsets: Vec<Vec<usize>> = (0..=k).flat_map(|r| (0..k).combinations(r)).collect();
    let mut acc = vec![0.0f64; subsets.len()];
    let mut points: Vec<Vec<f64>> = vec![vec![0.0; d]; order];
    for _ in 0..m {
        // Fresh slots are shared across subsets (common random numbers).
        let fresh: Vec<Vec<f64>> = (0..order).map(|_| fresh_point(d, s)).collect();
        for (si, subset) in subsets.iter().enumerate() {
            for (slot, point) in points.iter_mut().enumerate() {
                if let Some(pos) = subset.iter().position(|&f| f == slot) {
                    point.copy_from_slice(&fixed[subset[pos]]);
                } else {
                    point.copy_from_slice(&fresh[slot]);
                }
            }
            let input = KernelInput {
                d,
                points: points.clone(),
            };
            acc[si] += kernel_h(&input);
        }
    }
    let mut total = 0.0;
    for (si, subset) in subsets.iter().enumerate() {
        let sign = if (k - subset.len()) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * acc[si] / m as f64;
    }
    total
}

fn for_each_injective_tuple<F: FnMut(&[usize])>(n: usize, len: usize, visit: &mut F) {
    let mut tuple = vec![0usize; len];
    let mut used = vec![false; n];
    fn rec<F: FnMut(&[usize])>(
        n: usize,
        len: usize,
        depth: usize,
        tuple: &mut Vec<usize>,
        used: &mut Vec<bool>,
        visit: &mut F,
    ) {
        if depth == len {
            visit(tuple);
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                tuple[depth] = i;
                rec(n, len, depth + 1, tuple, used, visit);
                used[i] = false;
            }
        }
    }
    rec(n, len, 0, &mut tuple, &mut used, visit);
}

/// Both sides of the exact identity
/// `sum_{|E(ii,jj)|=1} a_ii a_jj = S_n(h) / V_n` for a raw `d x n` Gaussian
/// matrix: the left side from squared minors of the orthonormalized rows,
/// the right side from the kernel sum over raw columns and the fourth powers
/// of the sequential Gram-Schmidt residual norms.
pub fn z_identity_check(g: &[f64], d: usize, n: usize) -> Result<(f64, f64)> {
    if g.len() != d * n {
        return Err(Error::InvalidParameter("matrix shape mismatch".into()));
    }
    let order = 2 * d - 1;
    if n < order {
        return Err(Error::InvalidParameter(format!(
            "need n >= {order} for the kernel sum"
        )));
    }
    if n > 12 || d > 3 {
        return Err(Error::SizeGuard(
            "identity check enumerates tuples; capped at n <= 12, d <= 3".into(),
        ));
    }

    let (rows, norms) = geometry::gram_schmidt(g, d, n)?;
    let basis = SubspaceBasis::from_rows(rows, d, n)?;
    let coeffs = cauchy_binet_coeffs(&basis)?;

    // Left side: ordered distinct d-tuples with exactly one index collision.
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    for_each_injective_tuple(n, d, &mut |t| tuples.push(t.to_vec()));
    let weights: Vec<f64> = tuples.iter().map(|t| coeffs.ordered_weight(t)).collect();
    let mut lhs = 0.0;
    for (i, ti) in tuples.iter().enumerate() {
        for (j, tj) in tuples.iter().enumerate() {
            let mut collisions = 0usize;
            for a in ti {
                if tj.contains(a) {
                    collisions += 1;
                }
            }
            if collisions == 1 {
                lhs += weights[i] * weights[j];
            }
        }
    }

    // Right side: kernel sum over injective (2d-1)-tuples of raw columns.
    let columns: Vec<Vec<f64>> = (0..n).map(|j| (0..d).map(|r| g[r * n + j]).collect()).collect();
    let mut s_n = 0.0;
    for_each_injective_tuple(n, order, &mut |t| {
        let input = KernelInput {
            d,
            points: t.iter().map(|&i| columns[i].clone()).collect(),
        };
        s_n += kernel_h(&input);
    });
    let v_n: f64 = norms.iter().map(|x| x.powi(4)).product();
    Ok((lhs, s_n / v_n))
}

/// Monte Carlo audit of the closed-form triple with standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct UstatReport {
    pub d: usize,
    pub samples: u64,
    pub eh_estimate: f64,
    pub eh_stderr: f64,
    pub eh_target: f64,
    pub eh_z: f64,
    pub var_pi1_estimate: f64,
    pub var_pi1_stderr: f64,
    pub var_pi1_target: f64,
    pub var_pi1_z: f64,
    pub cov_estimate: f64,
    pub cov_stderr: f64,
    pub cov_target: f64,
    pub cov_z: f64,
}

impl UstatReport {
    pub fn max_abs_z(&self) -> f64 {
        self.eh_z.abs().max(self.var_pi1_z.abs()).max(self.cov_z.abs())
    }
}

/// Estimates `(E h, Var(pi_1 h), Cov(pi_1 h, |G|^2 - d))` by Monte Carlo and
/// reports z-scores against the closed forms.
pub fn ustat_mc_report(d: usize, samples: u64, s: &mut RngStream) -> UstatReport {
    let order = 2 * d - 1;
    let (eh_target, var_target, cov_target) = closed_form_targets(d);

    // E h over fresh tuples.
    let mut h_vals = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let points: Vec<Vec<f64>> = (0..order).map(|_| fresh_point(d, s)).collect();
        h_vals.push(kernel_h(&KernelInput { d, points }));
    }
    let eh = crate::stats::mean(&h_vals);
    let eh_se = (crate::stats::variance(&h_vals) / samples as f64).sqrt();

    // pi_1 h and |G|^2 - d at shared Gaussian points.
    let mut v = Vec::with_capacity(samples as usize);
    let mut w = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let gamma = fresh_point(d, s);
        let norm2: f64 = gamma.iter().map(|x| x * x).sum();
        v.push(pi1_h_closed(d, &gamma));
        w.push(norm2 - d as f64);
    }
    let mv = crate::stats::mean(&v);
    let mw = crate::stats::mean(&w);
    let nf = samples as f64;
    let var_est = crate::stats::variance(&v);
    // Standard error of the sample variance from the fourth central moment.
    let m4: f64 = v.iter().map(|x| (x - mv).powi(4)).sum::<f64>() / nf;
    let var_se = ((m4 - var_est * var_est).max(0.0) / nf).sqrt();
    let cov_terms: Vec<f64> = v.iter().zip(&w).map(|(a, b)| (a - mv) * (b - mw)).collect();
    let cov_est = cov_terms.iter().sum::<f64>() / (nf - 1.0);
    let cov_se = (crate::stats::variance(&cov_terms) / nf).sqrt();

    UstatReport {
        d,
        samples,
        eh_estimate: eh,
        eh_stderr: eh_se,
        eh_target,
        eh_z: (eh - eh_target) / eh_se,
        var_pi1_estimate: var_est,
        var_pi1_stderr: var_se,
        var_pi1_target: var_target,
        var_pi1_z: (var_est - var_target) / var_se,
        cov_estimate: cov_est,
        cov_stderr: cov_se,
        cov_target,
        cov_z: (cov_est - cov_target) / cov_se,
    }
}

/// Assembles the CLT limit variance from the U-statistic route:
/// `prefactor^2 * (9 nu^2 / (64 mu^5)) (8 (Eh)^2 d + (2d-1)^2 Var(pi_1 h)
///  - 4 (2d-1) Eh Cov)`, with `mu = (E X)^d`, `nu = (E X)^{2d-2} Var(X)` and
/// `X = W^{-1}`. Must agree with the closed form in `clt_constants`.
pub fn assembled_limit_variance(p: PNorm, d: usize) -> Result<f64> {
    let alpha = p.value() / 2.0;
    let ex = w_moment(alpha, -1.0)?;
    let ex2 = w_moment(alpha, -2.0)?;
    let var_x = ex2 - ex * ex;
    let mu = ex.powi(d as i32);
    let nu = ex.powi(2 * d as i32 - 2) * var_x;
    let (eh, var_pi1, cov) = closed_form_targets(d);
    let df = d as f64;
    let bracket = 8.0 * eh * eh * df + (2.0 * df - 1.0).powi(2) * var_pi1
        - 4.0 * (2.0 * df - 1.0) * eh * cov;
    let prefactor = crate::estimators::det_formula_prefactor(p, d);
    Ok(prefactor * prefactor * 9.0 * nu * nu / (64.0 * mu.powi(5)) * bracket)
}
