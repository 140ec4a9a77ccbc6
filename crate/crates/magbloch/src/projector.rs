//! Spectral projectors and smooth continuation of band frames.
//!
//! For an isolated group of eigenvalues inside a disk `|z - c| < r` the Riesz
//! projector is computed two independent ways: as the eigenvector sum
//! `P = Σ v v†` over the pairs inside the disk, and as the contour quadrature
//!
//! ```text
//!     P ≈ (r/N) Σ_k e^{iφ_k} (z_k - H)⁻¹,    z_k = c + r e^{iφ_k},
//! ```
//!
//! whose trapezoidal error decays geometrically in `N` as long as no
//! eigenvalue sits near the circle. Keeping both routes lets tests pin one
//! against the other.
//!
//! `gram_orthonormalize` continues an orthonormal frame through parameter
//! changes: the old frame is pushed through the new projector and
//! re-orthonormalized by the inverse square root of its Gram matrix. When the
//! Gram matrix loses rank the continuation is meaningless and an error is
//! returned instead of a silently rotated frame.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;

use crate::eigensolve::EigenSolution;
use crate::error::Error;
use crate::linalg;
use crate::Result;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Minimum relative distance an eigenvalue must keep from the contour.
pub const CONTOUR_TOL: f64 = 1e-9;
/// Smallest Gram eigenvalue for which continuation is still accepted.
pub const GRAM_TOL: f64 = 1e-8;

/// An orthogonal projector onto the spectral subspace of a disk.
#[derive(Debug, Clone)]
pub struct SpectralProjector {
    pub matrix: Array2<Complex64>,
    pub rank: usize,
    pub center: f64,
    pub radius: f64,
}

impl SpectralProjector {
    /// Largest entry of |P² − P|.
    pub fn idempotency_defect(&self) -> f64 {
        let sq = self.matrix.dot(&self.matrix);
        (&sq - &self.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.matrix.nrows();
        (0..n).map(|i| self.matrix[[i, i]]).sum()
    }
}

fn contour_margin_check(values: &[f64], center: f64, radius: f64) -> Result<()> {
    let tol = CONTOUR_TOL * 1.0f64.max(center.abs() + radius);
    for &v in values {
        let distance = ((v - center).abs() - radius).abs();
        if distance <= tol {
            return Err(Error::EigenvalueOnContour { distance, tol });
        }
    }
    Ok(())
}

/// Riesz projector as the eigenvector sum over the pairs inside the disk.
///
/// The solution must make the disk decidable: every computed eigenvalue has
/// to keep clear of the circle, and if the solution is partial the disk must
/// close strictly below the last computed eigenvalue, so that nothing
/// uncomputed can hide inside.
pub fn riesz_projector(es: &EigenSolution, center: f64, radius: f64) -> Result<SpectralProjector> {
    if radius <= 0.0 {
        return Err(Error::SolverFailure(
            "projector disk needs a positive radius".into(),
        ));
    }
    contour_margin_check(&es.eigenvalues, center, radius)?;
    if es.len() < es.dim {
        let top = *es
            .eigenvalues
            .last()
            .ok_or_else(|| Error::SolverFailure("projector needs at least one eigenpair".into()))?;
        if center + radius >= top {
            return Err(Error::SolverFailure(format!(
                "projector disk reaches {:.6e} but the solve only certifies the spectrum up to {:.6e}",
                center + radius,
                top
            )));
        }
    }

    let n = es.dim;
    let mut p = Array2::<Complex64>::zeros((n, n));
    let mut rank = 0usize;
    for (k, &lambda) in es.eigenvalues.iter().enumerate() {
        if (lambda - center).abs() < radius {
            rank += 1;
            let v = es.eigenvector(k);
            for i in 0..n {
                for j in 0..n {
                    p[[i, j]] += v[i] * v[j].conj();
                }
            }
        }
    }
    Ok(SpectralProjector {
        matrix: p,
        rank,
        center,
        radius,
    })
}

/// Riesz projector by resolvent quadrature on the circle.
///
/// Nodes sit at half-integer angles so none of them falls on the real axis,
/// where a Hermitian spectrum could collide with the contour exactly.
pub fn riesz_projector_contour(
    h: &Array2<Complex64>,
    center: f64,
    radius: f64,
    n_nodes: usize,
) -> Result<SpectralProjector> {
    let n = h.nrows();
    if radius <= 0.0 {
        return Err(Error::SolverFailure(
            "projector disk needs a positive radius".into(),
        ));
    }
    if n_nodes < 4 {
        return Err(Error::SolverFailure(
            "contour quadrature needs at least 4 nodes".into(),
        ));
    }
    let scale = linalg::max_abs(h).max(center.abs() + radius).max(1.0);
    let mut p = Array2::<Complex64>::zeros((n, n));
    for k in 0..n_nodes {
        let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_nodes as f64;
        let node = Complex64::from_polar(radius, phi);
        let z = Complex64::new(center, 0.0) + node;
        let mut shifted = h.mapv(|w| -w);
        for i in 0..n {
            shifted[[i, i]] += z;
        }
        let (inv, min_pivot) = linalg::lu_inverse(&shifted)
            .map_err(|_| Error::NearSingularResolvent { re: z.re, im: z.im })?;
        if min_pivot < 1e-12 * scale {
            return Err(Error::NearSingularResolvent { re: z.re, im: z.im });
        }
        let weight = node / n_nodes as f64; // (r/N) e^{iφ_k}
        p.zip_mut_with(&inv, |acc, &r| *acc += weight * r);
    }
    // The exact projector is Hermitian; fold the skew quadrature noise away.
    let p_dag = linalg::adjoint(&p);
    let mut herm = p;
    herm.zip_mut_with(&p_dag, |a, &b| *a = 0.5 * (*a + b));

    let trace: Complex64 = (0..n).map(|i| herm[[i, i]]).sum();
    let rank_f = trace.re;
    let rank = rank_f.round();
    if (rank_f - rank).abs() > 0.01 || rank < 0.0 {
        return Err(Error::SolverFailure(format!(
            "contour projector trace {:.6} is not close to an integer; more nodes or a wider margin needed",
            rank_f
        )));
    }
    Ok(SpectralProjector {
        matrix: herm,
        rank: rank as usize,
        center,
        radius,
    })
}

/// Push an orthonormal frame through a projector and re-orthonormalize it by
/// the inverse square root of its Gram matrix. Fails when the projected frame
/// no longer spans the target subspace.
pub fn gram_orthonormalize(
    p: &SpectralProjector,
    frame: &Array2<Complex64>,
) -> Result<Array2<Complex64>> {
    let n = frame.nrows();
    let k = frame.ncols();
    if p.matrix.nrows() != n {
        return Err(Error::SolverFailure(
            "frame and projector dimensions differ".into(),
        ));
    }
    let pushed = p.matrix.dot(frame);
    let mut gram = Array2::<Complex64>::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            let mut acc = C_ZERO;
            for r in 0..n {
                acc += pushed[[r, i]].conj() * pushed[[r, j]];
            }
            gram[[i, j]] = acc;
        }
    }
    let (w, u) = linalg::hermitian_eigendecomposition(&gram)?;
    let min_eig = if k > 0 { w[0] } else { 1.0 };
    if min_eig <= GRAM_TOL {
        return Err(Error::ContinuationLost {
            min_eig,
            tol: GRAM_TOL,
        });
    }
    // G^{-1/2} = U diag(w^{-1/2}) U†.
    let mut inv_sqrt = Array2::<Complex64>::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            let mut acc = C_ZERO;
            for l in 0..k {
                acc += u[[i, l]] * u[[j, l]].conj() / w[l].sqrt();
            }
            inv_sqrt[[i, j]] = acc;
        }
    }
    Ok(pushed.dot(&inv_sqrt))
}

/// Compress an operator to a frame: `M = Φ† H Φ`.
pub fn reduced_matrix(h: &Array2<Complex64>, frame: &Array2<Complex64>) -> Array2<Complex64> {
    let hf = h.dot(frame);
    linalg::adjoint(frame).dot(&hf)
}

/// First-order change of a simple eigenvalue when the potential moves by `u`:
/// `dE/dt = ⟨φ, u φ⟩ / ⟨φ, φ⟩`, with `u` sampled at the grid sites carrying
/// the eigenvector entries (the uniform site weight cancels).
pub fn hellmann_feynman(phi: ArrayView1<'_, Complex64>, u_values: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (z, &u) in phi.iter().zip(u_values.iter()) {
        let w = z.norm_sqr();
        num += u * w;
        den += w;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::eigensolve_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            a[[i, i]] = Complex64::new(rng.random_range(-2.0..2.0), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                a[[i, j]] = z;
                a[[j, i]] = z.conj();
            }
        }
        a
    }

    #[test]
    fn eigensum_projector_is_idempotent_hermitian_with_integer_trace() {
        let h = random_hermitian(18, 3);
        let es = eigensolve_matrix(&h, 18).unwrap();
        // Disk containing exactly the lowest three eigenvalues.
        let center = 0.5 * (es.eigenvalues[0] + es.eigenvalues[2]);
        let radius = (es.eigenvalues[2] - center) + 0.4 * (es.eigenvalues[3] - es.eigenvalues[2]);
        let p = riesz_projector(&es, center, radius).unwrap();
        assert_eq!(p.rank, 3);
        assert!(p.idempotency_defect() < 1e-11);
        assert!((p.trace() - Complex64::new(3.0, 0.0)).norm() < 1e-11);
        let dag = linalg::adjoint(&p.matrix);
        let skew = (&p.matrix - &dag)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(skew < 1e-12);
    }

    #[test]
    fn contour_quadrature_matches_eigensum() {
        let h = random_hermitian(24, 7);
        let es = eigensolve_matrix(&h, 24).unwrap();
        // Separate the lowest three with at least 20% relative margin.
        let center = 0.5 * (es.eigenvalues[0] + es.eigenvalues[2]);
        let gap = es.eigenvalues[3] - es.eigenvalues[2];
        let radius = (es.eigenvalues[2] - center) + 0.5 * gap;
        let p_sum = riesz_projector(&es, center, radius).unwrap();
        let p_int = riesz_projector_contour(&h, center, radius, 128).unwrap();
        assert_eq!(p_sum.rank, p_int.rank);
        let diff = (&p_sum.matrix - &p_int.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "projector routes disagree by {diff:.2e}");
        assert!(p_int.idempotency_defect() < 1e-7);
    }

    #[test]
    fn eigenvalue_on_contour_is_rejected() {
        let h = random_hermitian(10, 5);
        let es = eigensolve_matrix(&h, 10).unwrap();
        let center = es.eigenvalues[0] - 0.5;
        let radius = es.eigenvalues[2] - center; // circle passes through λ₂
        match riesz_projector(&es, center, radius) {
            Err(Error::EigenvalueOnContour { .. }) => {}
            other => panic!("expected EigenvalueOnContour, got {other:?}"),
        }
    }

    #[test]
    fn partial_solution_must_cover_the_disk() {
        let h = random_hermitian(16, 6);
        let es = eigensolve_matrix(&h, 4).unwrap();
        // Disk reaching past the last computed eigenvalue cannot be certified.
        let center = es.eigenvalues[3];
        let radius = 10.0;
        assert!(matches!(
            riesz_projector(&es, center, radius),
            Err(Error::SolverFailure(_))
        ));
    }

    #[test]
    fn gram_continuation_returns_orthonormal_frame_in_range() {
        let h = random_hermitian(20, 8);
        let es = eigensolve_matrix(&h, 20).unwrap();
        let center = 0.5 * (es.eigenvalues[0] + es.eigenvalues[1]);
        let radius = (es.eigenvalues[1] - center) + 0.4 * (es.eigenvalues[2] - es.eigenvalues[1]);
        let p = riesz_projector(&es, center, radius).unwrap();
        // Start from coordinate columns, clearly not in the range.
        let mut frame = Array2::<Complex64>::zeros((20, 2));
        frame[[0, 0]] = Complex64::new(1.0, 0.0);
        frame[[1, 1]] = Complex64::new(1.0, 0.0);
        let phi = gram_orthonormalize(&p, &frame).unwrap();
        // Orthonormal...
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = C_ZERO;
                for r in 0..20 {
                    acc += phi[[r, i]].conj() * phi[[r, j]];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc - Complex64::new(want, 0.0)).norm() < 1e-10);
            }
        }
        // ...and inside range(P): P φ = φ.
        let pphi = p.matrix.dot(&phi);
        let defect = (&pphi - &phi).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(defect < 1e-10);
    }

    #[test]
    fn continuation_fails_loudly_when_frame_is_orthogonal_to_range() {
        let h = random_hermitian(12, 9);
        let es = eigensolve_matrix(&h, 12).unwrap();
        let center = es.eigenvalues[0];
        let radius = 0.4 * (es.eigenvalues[1] - es.eigenvalues[0]);
        let p = riesz_projector(&es, center, radius).unwrap();
        assert_eq!(p.rank, 1);
        // A frame orthogonal to the ground state: take the top eigenvector.
        let mut frame = Array2::<Complex64>::zeros((12, 1));
        for i in 0..12 {
            frame[[i, 0]] = es.eigenvectors[[i, 11]];
        }
        match gram_orthonormalize(&p, &frame) {
            Err(Error::ContinuationLost { .. }) => {}
            other => panic!("expected ContinuationLost, got {other:?}"),
        }
    }

    #[test]
    fn reduced_matrix_of_eigenframe_is_diagonal() {
        let h = random_hermitian(14, 10);
        let es = eigensolve_matrix(&h, 3).unwrap();
        let m = reduced_matrix(&h, &es.eigenvectors);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j {
                    Complex64::new(es.eigenvalues[i], 0.0)
                } else {
                    C_ZERO
                };
                assert!((m[[i, j]] - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn hellmann_feynman_of_constant_is_exactly_the_constant() {
        let h = random_hermitian(9, 11);
        let es = eigensolve_matrix(&h, 1).unwrap();
        let u = vec![1.0; 9];
        let slope = hellmann_feynman(es.eigenvector(0), &u);
        assert!((slope - 1.0).abs() < 1e-14);
        let u2 = vec![-3.25; 9];
        let slope2 = hellmann_feynman(es.eigenvector(0), &u2);
        assert!((slope2 + 3.25).abs() < 1e-12);
    }
}
