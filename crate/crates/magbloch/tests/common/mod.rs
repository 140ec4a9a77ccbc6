//! Shared helpers for the integration suites.
//!
//! The centerpiece is an independent Hermitian eigensolver (cyclic complex
//! Jacobi) that shares no code with the crate's Householder + QL
//! implementation, so the two can vouch for each other.
//!
//! Each test target pulls in a different subset of these helpers.
#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// ascending. Independent of the crate's solver: different algorithm,
/// different failure modes.
pub fn jacobi_eigenvalues(a: &Array2<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square input required");
    let mut m = a.clone();
    let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if frob == 0.0 {
        return vec![0.0; n];
    }

    for _sweep in 0..200 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[[p, q]].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * frob {
            let mut vals: Vec<f64> = (0..n).map(|k| m[[k, k]].re).collect();
            vals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            return vals;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = m[[p, q]];
                let r = b.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Dephase the pivot, then a real rotation annihilates it:
                // tan is the stable small-|t| root of t² + 2τt − 1 = 0 with
                // τ = (α − δ)/2r, which zeroes (δ−α)sc + r(c²−s²).
                let u = b / r; // e^{iφ}
                let alpha = m[[p, p]].re;
                let delta = m[[q, q]].re;
                let tau = (alpha - delta) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column update M ← M·U with U = [[c, −s·u], [s·ū, c]] on (p,q).
                for k in 0..n {
                    let kp = m[[k, p]];
                    let kq = m[[k, q]];
                    m[[k, p]] = kp * c + kq * s * u.conj();
                    m[[k, q]] = kp * (-s) * u + kq * c;
                }
                // Row update M ← U†·M.
                for k in 0..n {
                    let pk = m[[p, k]];
                    let qk = m[[q, k]];
                    m[[p, k]] = pk * c + qk * s * u;
                    m[[q, k]] = pk * (-s) * u.conj() + qk * c;
                }
            }
        }
    }
    panic!("jacobi oracle did not converge in 200 sweeps");
}

/// Random dense Hermitian matrix with entries of order one.
pub fn random_hermitian(n: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        a[[i, i]] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            a[[i, j]] = z;
            a[[j, i]] = z.conj();
        }
    }
    a
}

/// Largest absolute difference between two equally long sorted lists.
pub fn max_abs_diff(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
