//! Subspace and section geometry: orthonormal bases of `H^perp`, weighted
//! Gram determinants, Cauchy-Binet coefficient extraction, and exact
//! deterministic oracles for sections of dimension one and two.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::PNorm;

/// `d` orthonormal rows `u_1..u_d` of an ambient `R^n`; the columns
/// `v_1..v_n in R^d` drive the volume formulas. The section itself is the
/// orthogonal complement `H` of the row span.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    n: usize,
    d: usize,
    /// Row-major `d x n`.
    rows: Vec<f64>,
}

impl SubspaceBasis {
    /// Wraps rows after checking orthonormality to 1e-10.
    pub fn from_rows(rows: Vec<f64>, d: usize, n: usize) -> Result<Self> {
        if d == 0 || d > n || rows.len() != d * n {
            return Err(Error::InvalidParameter(format!(
                "basis shape mismatch: d = {d}, n = {n}, len = {}",
                rows.len()
            )));
        }
        let b = SubspaceBasis { n, d, rows };
        let defect = b.orthonormality_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "rows are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.n + j]
    }

    /// Column `v_j in R^d`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.d).map(|i| self.entry(i, j)).collect()
    }

    /// `max_{i,j} |<u_i, u_j> - delta_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.d {
            for j in i..self.d {
                let dot: f64 = (0..self.n).map(|k| self.entry(i, k) * self.entry(j, k)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `max entry of |sum_j v_j v_j^T - I|`; zero exactly when the rows are
    /// orthonormal.
    pub fn column_gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.d {
            for c in r..self.d {
                let mut s = 0.0;
                for j in 0..self.n {
                    s += self.entry(r, j) * self.entry(c, j);
                }
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

/// Sequential (modified) Gram-Schmidt of `d` raw row vectors.
///
/// Returns the orthonormal rows together with the residual norms
/// `|G_l - P_{l-1} G_l|`; fails when a pivot falls under `1e-12 sqrt(n)`.
pub(crate) fn gram_schmidt(raw: &[f64], d: usize, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(raw.len(), d * n);
    let mut rows = raw.to_vec();
    let mut norms = Vec::with_capacity(d);
    for i in 0..d {
        for j in 0..i {
            let dot: f64 = (0..n).map(|k| rows[i * n + k] * rows[j * n + k]).sum();
            for k in 0..n {
                rows[i * n + k] -= dot * rows[j * n + k];
            }
        }
        let norm = (0..n).map(|k| rows[i * n + k] * rows[i * n + k]).sum::<f64>().sqrt();
        if norm < 1e-12 * (n as f64).sqrt() {
            return Err(Error::InvalidParameter(format!(
                "rank-deficient input: Gram-Schmidt pivot {norm:.3e} at row {i}"
            )));
        }
        for k in 0..n {
            rows[i * n + k] /= norm;
        }
        norms.push(norm);
    }
    Ok((rows, norms))
}

/// Determinant of the weighted Gram matrix `sum_j x_j v_j v_j^T` through a
/// symmetric Cholesky factorization.
pub fn gram_det(basis: &SubspaceBasis, x: &[f64]) -> Result<f64> {
    if x.len() != basis.n() {
        return Err(Error::InvalidParameter(format!(
            "weight vector length {} does not match n = {}",
            x.len(),
            basis.n()
        )));
    }
    if x.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter(
            "weights must be strictly positive".into(),
        ));
    }
    let d = basis.d();
    let mut m = vec![0.0f64; d * d];
    for j in 0..basis.n() {
        let xj = x[j];
        for r in 0..d {
            let vr = basis.entry(r, j) * xj;
            for c in r..d {
                m[r * d + c] += vr * basis.entry(c, j);
            }
        }
    }
    cholesky_det(&mut m, d).ok_or(Error::NotPositiveDefinite)
}

/// In-place Cholesky on the upper triangle; returns `det = prod L_ii^2`.
pub(crate) fn cholesky_det(m: &mut [f64], d: usize) -> Option<f64> {
    let mut det = 1.0;
    for i in 0..d {
        let mut pivot = m[i * d + i];
        for k in 0..i {
            pivot -= m[k * d + i] * m[k * d + i];
        }
        if pivot <= 0.0 {
            return None;
        }
        let l = pivot.sqrt();
        det *= pivot;
        m[i * d + i] = l;
        for j in (i + 1)..d {
            let mut v = m[i * d + j];
            for k in 0..i {
                v -= m[k * d + i] * m[k * d + j];
            }
            m[i * d + j] = v / l;
        }
    }
    Some(det)
}

/// Determinant of the `d x d` matrix whose columns are `basis` columns
/// selected by `cols`, via partial-pivot LU.
pub(crate) fn det_of_columns(basis: &SubspaceBasis, cols: &[usize]) -> f64 {
    let d = basis.d();
    debug_assert_eq!(cols.len(), d);
    let mut m = vec![0.0f64; d * d];
    for (c, &j) in cols.iter().enumerate() {
        for r in 0..d {
            m[r * d + c] = basis.entry(r, j);
        }
    }
    det_dense(&mut m, d)
}

pub(crate) fn det_dense(m: &mut [f64], d: usize) -> f64 {
    let mut det = 1.0;
    for i in 0..d {
        let mut p = i;
        for r in (i + 1)..d {
            if m[r * d + i].abs() > m[p * d + i].abs() {
                p = r;
            }
        }
        if m[p * d + i] == 0.0 {
            return 0.0;
        }
        if p != i {
            for c in 0..d {
                m.swap(i * d + c, p * d + c);
            }
            det = -det;
        }
        let pivot = m[i * d + i];
        det *= pivot;
        for r in (i + 1)..d {
            let f = m[r * d + i] / pivot;
            for c in i..d {
                m[r * d + c] -= f * m[i * d + c];
            }
        }
    }
    det
}

/// Squared `d x d` minors of the row matrix, indexed by increasing column
/// tuples. With rows orthonormal the coefficients sum to one (Cauchy-Binet
/// applied to the identity Gram matrix); the per-ordered-tuple weights used
/// in the fluctuation identities are these values divided by `d!`.
#[derive(Debug, Clone)]
pub struct CauchyBinetCoeffs {
    d: usize,
    n: usize,
    /// Lexicographically ordered `(increasing tuple, squared minor)`.
    entries: Vec<(Vec<usize>, f64)>,
}

impl CauchyBinetCoeffs {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.entries.iter().map(|(t, v)| (t.as_slice(), *v))
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v).sum()
    }

    /// Squared minor for an increasing tuple.
    pub fn coefficient(&self, tuple: &[usize]) -> f64 {
        debug_assert!(tuple.windows(2).all(|w| w[0] < w[1]));
        match self
            .entries
            .binary_search_by(|(t, _)| t.as_slice().cmp(tuple))
        {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    /// Weight of one ordered distinct tuple (squared minor over `d!`).
    pub fn ordered_weight(&self, tuple: &[usize]) -> f64 {
        let mut sorted = tuple.to_vec();
        sorted.sort_unstable();
        self.coefficient(&sorted) / factorial(self.d)
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, d: usize) -> f64 {
    let d = d.min(n - d);
    let mut v = 1.0;
    for i in 0..d {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Enumerates all squared `d x d` minors. Guarded to `C(n,d) <= 1e7`.
pub fn cauchy_binet_coeffs(basis: &SubspaceBasis) -> Result<CauchyBinetCoeffs> {
    let (n, d) = (basis.n(), basis.d());
    if binomial(n, d) > 1e7 {
        return Err(Error::SizeGuard(format!(
            "C({n},{d}) squared minors exceed the 1e7 enumeration guard"
        )));
    }
    let mut entries = Vec::new();
    for tuple in (0..n).combinations(d) {
        let det = det_of_columns(basis, &tuple);
        entries.push((tuple, det * det));
    }
    Ok(CauchyBinetCoeffs { d, n, entries })
}

/// Orthonormal basis of the complement `H = span(rows)^perp`, built by
/// projecting standard basis vectors. Only used for the low-dimensional
/// section oracles, where `n` is small.
fn complement_basis(basis: &SubspaceBasis, k: usize) -> Vec<Vec<f64>> {
    let (n, d) = (basis.n(), basis.d());
    debug_assert_eq!(k, n - d);
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..n {
        if found.len() == k {
            break;
        }
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        for i in 0..d {
            let dot: f64 = (0..n).map(|t| v[t] * basis.entry(i, t)).sum();
            for t in 0..n {
                v[t] -= dot * basis.entry(i, t);
            }
        }
        for w in &found {
            let dot: f64 = (0..n).map(|t| v[t] * w[t]).sum();
            for t in 0..n {
                v[t] -= dot * w[t];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for t in 0..n {
                v[t] /= norm;
            }
            found.push(v);
        }
    }
    assert_eq!(found.len(), k, "complement construction lost rank");
    found
}

fn p_norm(v: &[f64], p: f64) -> f64 {
    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Exact volume of `B_p^n ∩ H` for sections of dimension `k = n - d` one or
/// two: a symmetric segment of length `2/|w|_p`, or the polar-coordinate
/// area `(1/2) ∫ rho(theta)^2 dtheta` by adaptive quadrature.
pub fn section_volume_oracle(p: PNorm, basis: &SubspaceBasis) -> Result<f64> {
    let pv = p.require_finite_oracle()?;
    let k = basis.n() - basis.d();
    match k {
        1 => {
            let w = &complement_basis(basis, 1)[0];
            Ok(2.0 / p_norm(w, pv))
        }
        2 => {
            let es = complement_basis(basis, 2);
            let (e1, e2) = (&es[0], &es[1]);
            let n = basis.n();
            let rho2 = |theta: f64| {
                let (c, s) = (theta.cos(), theta.sin());
                let dir: Vec<f64> = (0..n).map(|i| c * e1[i] + s * e2[i]).collect();
                let norm = p_norm(&dir, pv);
                1.0 / (norm * norm)
            };
            // rho(theta + pi) = rho(theta), so the half-turn integral is the
            // area. The integrand has derivative kinks where a coordinate of
            // the direction crosses zero; splitting there keeps each piece
            // smooth for the quadrature.
            let pi = std::f64::consts::PI;
            let mut cuts = vec![0.0];
            for i in 0..n {
                if e1[i] != 0.0 || e2[i] != 0.0 {
                    let theta = (-e1[i]).atan2(e2[i]).rem_euclid(pi);
                    if theta > 1e-12 && theta < pi - 1e-12 {
                        cuts.push(theta);
                    }
                }
            }
            cuts.push(pi);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut total = 0.0;
            for w in cuts.windows(2) {
                if w[1] - w[0] > 1e-14 {
                    total += quad::adaptive(&rho2, w[0], w[1], 1e-11, 1e-11, 1 << 16)?;
                }
            }
            Ok(total)
        }
        _ => Err(Error::InvalidParameter(format!(
            "section oracle supports dimensions 1 and 2, got k = {k}"
        ))),
    }
}

impl PNorm {
    fn require_finite_oracle(self) -> Result<f64> {
        if self.is_finite() {
            Ok(self.value())
        } else {
            Err(Error::InvalidParameter(
                "section oracle needs finite p; the cube has its own oracle".into(),
            ))
        }
    }
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0 + z.powi(4) / 120.0
    } else {
        z.sin() / z
    }
}

/// Normalized parallel-section volume of the cube:
/// `2^{-n} Vol(B_inf^n ∩ (x u + H))` for a unit normal `u`, i.e. the density
/// at `x` of `sum_i u_i Y_i` with `Y_i` uniform on [-1, 1].
///
/// With only two nonzero coordinates the density is the explicit trapezoid;
/// otherwise it is recovered from the characteristic-function product
/// `f(x) = (1/pi) ∫ cos(xt) prod_i sinc(u_i t) dt`, truncated where the
/// certified bound `prod min(1, 1/|u_i t|)` pushes the tail under 1e-12.
pub fn cube_parallel_section_oracle(x: f64, basis: &SubspaceBasis) -> Result<f64> {
    if basis.d() != 1 {
        return Err(Error::InvalidParameter(
            "cube oracle is defined for codimension one".into(),
        ));
    }
    let u: Vec<f64> = basis.row(0).iter().copied().filter(|v| *v != 0.0).collect();
    if u.len() < 2 {
        return Err(Error::InvalidParameter(
            "cube section density needs at least two nonzero coordinates".into(),
        ));
    }
    if u.len() == 2 {
        // Trapezoid: convolution of two scaled uniforms.
        let a = u[0].abs().max(u[1].abs());
        let b = u[0].abs().min(u[1].abs());
        let ax = x.abs();
        return Ok(if ax <= a - b {
            1.0 / (2.0 * a)
        } else if ax <= a + b {
            (a + b - ax) / (4.0 * a * b)
        } else {
            0.0
        });
    }

    let mut mags: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // Certified tail bound from the largest coordinates only; dropping the
    // small ones (whose sinc factors are at most one) keeps the bound valid
    // while making it usable at moderate t.
    let cutoff = mags[0] * 5e-3;
    let mut top: Vec<f64> = mags
        .iter()
        .copied()
        .take_while(|&v| v >= cutoff)
        .take(12)
        .collect();
    if top.len() < 2 {
        top = mags.iter().copied().take(2).collect();
    }
    let m = top.len() as f64;
    let coef: f64 = top.iter().map(|v| 1.0 / v).product();
    let t_power = 1.0 / top[top.len() - 1];
    let tail_bound = move |t: f64| {
        if t < t_power {
            f64::INFINITY
        } else {
            coef * t.powf(1.0 - m) / (m - 1.0)
        }
    };

    let freq: f64 = mags.iter().sum::<f64>() + x.abs();
    let f = |t: f64| {
        let mut prod = (x * t).cos();
        for &ui in &u {
            prod *= sinc(ui * t);
            if prod == 0.0 {
                break;
            }
        }
        prod
    };
    let integral = quad::half_line(
        &f,
        2.0 / freq,
        1e-12,
        tail_bound,
        1 << 22,
        4.0 * std::f64::consts::PI / freq,
    )?;
    Ok((integral / std::f64::consts::PI).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_haar_basis, RngStream};

    fn pn(p: f64) -> PNorm {
        PNorm::new(p).unwrap()
    }

    fn haar(n: usize, d: usize, seed: u64) -> SubspaceBasis {
        sample_haar_basis(n, d, &mut RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn gram_det_identity_at_unit_weights() {
        for (n, d) in [(5, 1), (6, 2), (8, 3), (12, 4)] {
            let b = haar(n, d, 7 + n as u64);
            let det = gram_det(&b, &vec![1.0; n]).unwrap();
            assert!(
                (det - 1.0).abs() < 1e-12,
                "n={n}, d={d}: det {det}"
            );
        }
    }

    #[test]
    fn gram_det_scalar_case() {
        let b = haar(6, 1, 3);
        let x: Vec<f64> = (0..6).map(|j| 0.5 + 0.3 * j as f64).collect();
        let want: f64 = (0..6).map(|j| x[j] * b.entry(0, j).powi(2)).sum();
        let got = gram_det(&b, &x).unwrap();
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn gram_det_matches_minor_expansion() {
        // Cauchy-Binet: det(sum x_j v_j v_j^T) = sum over increasing tuples
        // of det^2 * prod of the tuple's weights.
        let mut s = RngStream::new(40, 0);
        for (n, d) in [(5, 2), (9, 2), (12, 3)] {
            let b = haar(n, d, 100 + n as u64);
            let coeffs = cauchy_binet_coeffs(&b).unwrap();
            for _ in 0..5 {
                let x: Vec<f64> = (0..n).map(|_| 0.2 + s.uniform()).collect();
                let brute: f64 = coeffs
                    .iter()
                    .map(|(t, c)| c * t.iter().map(|&j| x[j]).product::<f64>())
                    .sum();
                let got = gram_det(&b, &x).unwrap();
                assert!(
                    ((got - brute) / brute).abs() < 1e-10,
                    "n={n} d={d}: {got} vs {brute}"
                );
            }
        }
    }

    #[test]
    fn coefficients_sum_to_one() {
        let mut worst: f64 = 0.0;
        for (i, &(n, d)) in [(6usize, 1usize), (6, 2), (8, 3)].iter().enumerate() {
            for r in 0..333 {
                let b = haar(n, d, (i * 1000 + r) as u64);
                let s = cauchy_binet_coeffs(&b).unwrap().sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        assert!(worst < 1e-10, "worst coefficient-sum defect {worst}");
    }

    #[test]
    fn coefficients_special_cases() {
        let b = haar(7, 1, 5);
        let coeffs = cauchy_binet_coeffs(&b).unwrap();
        for j in 0..7 {
            let want = b.entry(0, j).powi(2);
            assert!((coeffs.coefficient(&[j]) - want).abs() < 1e-15);
        }
        // d = n: the single minor is the squared determinant of an
        // orthogonal matrix.
        let b = haar(4, 4, 6);
        let coeffs = cauchy_binet_coeffs(&b).unwrap();
        let all: Vec<usize> = (0..4).collect();
        assert!((coeffs.coefficient(&all) - 1.0).abs() < 1e-11);
        assert!((coeffs.sum() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn ordered_weights_include_multiplicity() {
        let b = haar(6, 2, 9);
        let coeffs = cauchy_binet_coeffs(&b).unwrap();
        // Summing the ordered weights over both orderings of every pair
        // reproduces the increasing-tuple total.
        let mut total = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    total += coeffs.ordered_weight(&[i, j]);
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn size_guard_trips() {
        let b = haar(60, 10, 1);
        assert!(matches!(
            cauchy_binet_coeffs(&b),
            Err(Error::SizeGuard(_))
        ));
    }

    #[test]
    fn segment_oracle_known_sections() {
        // {x1 = 0} in the cross-polytope B_1^2: a diagonal segment of length 2.
        let b = SubspaceBasis::from_rows(vec![1.0, 0.0], 1, 2).unwrap();
        assert!((section_volume_oracle(pn(1.0), &b).unwrap() - 2.0).abs() < 1e-12);
        // Normal (1,1)/sqrt(2): section direction (-1,1)/sqrt(2) has
        // |.|_1 = sqrt(2), so the segment has length sqrt(2).
        let r = 0.5f64.sqrt();
        let b = SubspaceBasis::from_rows(vec![r, r], 1, 2).unwrap();
        let got = section_volume_oracle(pn(1.0), &b).unwrap();
        assert!((got - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn disc_oracle_euclidean_sections() {
        // Any 2-dimensional central section of B_2^n is a unit disc.
        for (n, d) in [(3, 1), (5, 3)] {
            let b = haar(n, d, 77);
            let got = section_volume_oracle(pn(2.0), &b).unwrap();
            assert!((got - std::f64::consts::PI).abs() < 1e-9, "{got}");
        }
    }

    #[test]
    fn oracle_rejects_large_sections() {
        let b = haar(8, 2, 3);
        assert!(section_volume_oracle(pn(1.0), &b).is_err());
    }

    #[test]
    fn oracle_is_basis_rotation_invariant() {
        // Mixing the rows by a planar rotation fixes H pointwise and must
        // not move the section volume.
        let b = haar(4, 2, 21);
        let (c, s) = (0.6f64, 0.8f64);
        let mut rows = Vec::with_capacity(8);
        for j in 0..4 {
            rows.push(c * b.entry(0, j) + s * b.entry(1, j));
        }
        for j in 0..4 {
            rows.push(-s * b.entry(0, j) + c * b.entry(1, j));
        }
        let rotated = SubspaceBasis::from_rows(rows, 2, 4).unwrap();
        for &p in &[0.7, 1.0, 1.6, 2.0, 3.5] {
            let a = section_volume_oracle(pn(p), &b).unwrap();
            let bb = section_volume_oracle(pn(p), &rotated).unwrap();
            assert!((a - bb).abs() < 1e-8, "p={p}: {a} vs {bb}");
        }
    }

    #[test]
    fn cube_oracle_rejects_single_coordinate() {
        let b = SubspaceBasis::from_rows(vec![1.0, 0.0, 0.0], 1, 3).unwrap();
        assert!(cube_parallel_section_oracle(0.0, &b).is_err());
    }

    #[test]
    fn cube_oracle_triangle_density() {
        // (Y1 + Y2)/sqrt(2) has the triangular density with peak 1/sqrt(2).
        let r = 0.5f64.sqrt();
        let b = SubspaceBasis::from_rows(vec![r, r], 1, 2).unwrap();
        let got = cube_parallel_section_oracle(0.0, &b).unwrap();
        assert!((got - r).abs() < 1e-12);
        // Off-center value: density of the triangle at 0.5.
        let got = cube_parallel_section_oracle(0.5, &b).unwrap();
        let want = (2.0 * r - 0.5) / (4.0 * r * r);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn cube_oracle_three_coordinates_matches_exact_formula() {
        // Equal weights 1/sqrt(3): the density of (Y1+Y2+Y3)/sqrt(3) at 0 is
        // sqrt(3) * 3/8 (piecewise-quadratic B-spline density at zero
        // after scaling: density of Y1+Y2+Y3 at 0 is 3/8... times sqrt(3)).
        let r = (1.0f64 / 3.0).sqrt();
        let b = SubspaceBasis::from_rows(vec![r, r, r], 1, 3).unwrap();
        let got = cube_parallel_section_oracle(0.0, &b).unwrap();
        let want = 3.0f64.sqrt() * 3.0 / 8.0;
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        // Outside the support the density vanishes.
        let far = cube_parallel_section_oracle(2.0, &b).unwrap();
        assert!(far.abs() < 1e-11);
    }

    #[test]
    fn cube_oracle_large_n_approaches_gaussian_value() {
        let b = haar(400, 1, 205);
        let got = cube_parallel_section_oracle(0.0, &b).unwrap();
        let want = (1.5 / std::f64::consts::PI).sqrt();
        assert!(
            (got - want).abs() < 0.05,
            "density {got} vs limit {want}"
        );
    }
}
