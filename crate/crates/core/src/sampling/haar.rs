//! Haar-distributed subspace bases.
//!
//! `d` i.i.d. standard Gaussian n-vectors orthonormalized by modified
//! Gram-Schmidt span a Haar-distributed d-dimensional subspace; its
//! orthogonal complement is the Haar codimension-d subspace the volume
//! formulas section against.

use crate::error::Result;
use crate::geometry::{self, SubspaceBasis};
use crate::sampling::RngStream;

/// Draws a Haar basis as `d` orthonormalized Gaussian rows. The measure-zero
/// event of numerical rank deficiency redraws the offending block.
pub fn sample_haar_basis(n: usize, d: usize, s: &mut RngStream) -> Result<SubspaceBasis> {
    assert!(d >= 1 && d <= n, "need 1 <= d <= n, got d={d}, n={n}");
    let mut raw = vec![0.0f64; d * n];
    loop {
        for v in raw.iter_mut() {
            *v = s.std_normal();
        }
        match geometry::gram_schmidt(&raw, d, n) {
            Ok((rows, _)) => return Ok(SubspaceBasis::from_rows(rows, d, n)?),
            Err(_) => continue,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cauchy_binet_coeffs;
    use crate::stats::{ks_two_sample, ks_two_sample_pvalue, mean, variance};

    #[test]
    fn rows_are_orthonormal() {
        for (n, d) in [(5, 1), (50, 3), (2000, 2)] {
            let mut s = RngStream::new(1, 0);
            let b = sample_haar_basis(n, d, &mut s).unwrap();
            assert!(b.orthonormality_defect() < 1e-10, "n={n}, d={d}");
            assert!(b.column_gram_defect() < 1e-10);
        }
    }

    #[test]
    fn coordinate_second_moment_is_one_over_n() {
        // Coordinates of a uniform sphere point are exchangeable, so
        // E u_{1,1}^2 = 1/n.
        let n = 50;
        let reps = 100_000;
        let mut s = RngStream::new(8, 0);
        let vals: Vec<f64> = (0..reps)
            .map(|_| {
                let b = sample_haar_basis(n, 1, &mut s).unwrap();
                b.entry(0, 0).powi(2)
            })
            .collect();
        let m = mean(&vals);
        let se = (variance(&vals) / reps as f64).sqrt();
        assert!(
            (m - 1.0 / n as f64).abs() < 4.0 * se,
            "E u^2 = {m}, want {}",
            1.0 / n as f64
        );
    }

    #[test]
    fn minor_coefficients_are_permutation_invariant() {
        // Permuting ambient coordinates leaves the law of the squared-minor
        // coefficients unchanged; compare one fixed marginal across a
        // permutation by a two-sample KS test.
        let n = 6;
        let d = 2;
        let reps = 4000;
        let perm = [3usize, 0, 4, 1, 5, 2];
        let mut s1 = RngStream::new(19, 0);
        let mut s2 = RngStream::new(19, 1);
        let tuple = [0usize, 1];
        let permuted_tuple = {
            let mut t = [perm[0], perm[1]];
            t.sort_unstable();
            t
        };
        let base: Vec<f64> = (0..reps)
            .map(|_| {
                let b = sample_haar_basis(n, d, &mut s1).unwrap();
                cauchy_binet_coeffs(&b).unwrap().coefficient(&tuple)
            })
            .collect();
        let perm_draws: Vec<f64> = (0..reps)
            .map(|_| {
                let b = sample_haar_basis(n, d, &mut s2).unwrap();
                cauchy_binet_coeffs(&b).unwrap().coefficient(&permuted_tuple)
            })
            .collect();
        let dist = ks_two_sample(&base, &perm_draws);
        let p = ks_two_sample_pvalue(dist, reps, reps);
        assert!(p > 0.01, "KS d = {dist}, p = {p}");
    }
}
