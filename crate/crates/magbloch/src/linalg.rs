//! Dense complex linear algebra kernels.
//!
//! Small self-contained implementations tuned for the sizes this crate
//! actually meets (fiber Rayleigh–Ritz blocks, Gram matrices, resolvent
//! nodes): Hermitian eigendecomposition by Householder tridiagonalization
//! followed by implicit-shift QL, and LU inversion with partial pivoting.
//! Large fibers never come through here directly — `crate::eigensolve`
//! routes them to the sparse filtered subspace iteration and only uses these
//! kernels on projected blocks.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Frobenius norm.
pub fn frobenius(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry magnitude.
pub fn max_abs(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Conjugate transpose.
pub fn adjoint(a: &Array2<Complex64>) -> Array2<Complex64> {
    let (r, c) = a.dim();
    Array2::from_shape_fn((c, r), |(i, j)| a[[j, i]].conj())
}

/// Hermitian eigendecomposition `A = Q diag(d) Q†` with eigenvalues ascending
/// and orthonormal eigenvector columns. The input is assumed Hermitian; only
/// that part of the data is used which a Hermitian matrix determines.
pub fn hermitian_eigendecomposition(
    a: &Array2<Complex64>,
) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::SolverFailure(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }

    let mut work = a.clone();
    let mut q = Array2::<Complex64>::eye(n);
    let (mut d, mut e) = tridiagonalize(&mut work, &mut q);
    ql_implicit(&mut d, &mut e, &mut q)?;

    // Sort ascending, permuting eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("eigenvalues are finite"));
    let values = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut vectors = Array2::<Complex64>::zeros((n, n));
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, new_col]] = q[[row, old_col]];
        }
    }
    Ok((values, vectors))
}

/// Reduce a Hermitian matrix to real symmetric tridiagonal form by
/// Householder reflections, accumulating the unitary into `q` and absorbing
/// the residual subdiagonal phases so that the returned off-diagonal is real
/// and non-negative. Returns `(diagonal, subdiagonal)`.
fn tridiagonalize(a: &mut Array2<Complex64>, q: &mut Array2<Complex64>) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut v = vec![C_ZERO; n];
    let mut p = vec![C_ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let alpha = a[[k + 1, k]];
        let mut below_sq = 0.0;
        for i in k + 2..n {
            below_sq += a[[i, k]].norm_sqr();
        }
        if below_sq == 0.0 {
            continue; // column already tridiagonal
        }
        let xnorm = (alpha.norm_sqr() + below_sq).sqrt();
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            C_ONE
        };
        let beta = -phase * xnorm; // subdiagonal value after reflection

        // Reflector v with H = I - τ vv† sending the column to β e₁.
        v[..=k].fill(C_ZERO);
        v[k + 1] = alpha - beta;
        for i in k + 2..n {
            v[i] = a[[i, k]];
        }
        let vsq: f64 = v[k + 1..].iter().map(|z| z.norm_sqr()).sum();
        if vsq == 0.0 {
            continue;
        }
        let tau = 2.0 / vsq;

        // Two-sided update A ← A - v w† - w v† on the trailing block, with
        // w = τ A v - (τ²/2)(v†Av) v.
        for i in k + 1..n {
            let mut acc = C_ZERO;
            for j in k + 1..n {
                acc += a[[i, j]] * v[j];
            }
            p[i] = acc * tau;
        }
        let vav: f64 = {
            let mut acc = C_ZERO;
            for i in k + 1..n {
                acc += v[i].conj() * p[i];
            }
            0.5 * acc.re // v†Av is real for Hermitian A
        };
        for i in k + 1..n {
            p[i] -= v[i] * vav * tau;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                a[[i, j]] -= upd;
            }
        }

        a[[k + 1, k]] = beta;
        a[[k, k + 1]] = beta.conj();
        for i in k + 2..n {
            a[[i, k]] = C_ZERO;
            a[[k, i]] = C_ZERO;
        }

        // Q ← Q (I - τ vv†).
        for row in 0..n {
            let mut acc = C_ZERO;
            for j in k + 1..n {
                acc += q[[row, j]] * v[j];
            }
            let acc = acc * tau;
            for j in k + 1..n {
                q[[row, j]] -= acc * v[j].conj();
            }
        }
    }

    // Phase-rotate columns so the subdiagonal becomes real non-negative.
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in 0..n {
        d[i] = a[[i, i]].re;
    }
    let mut cum = C_ONE;
    for k in 0..n.saturating_sub(1) {
        let ec = a[[k + 1, k]];
        let r = ec.norm();
        e[k] = r;
        let ph = if r > 0.0 { ec / r } else { C_ONE };
        cum *= ph;
        let scale = cum;
        for row in 0..n {
            q[[row, k + 1]] *= scale;
        }
    }
    (d, e)
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal matrix,
/// rotating the (complex) eigenvector columns in `q` along.
fn ql_implicit(d: &mut [f64], e: &mut [f64], q: &mut Array2<Complex64>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let rows = q.nrows();
    for l in 0..n {
        let mut iter = 0;
        loop {
            // First negligible coupling at or after l.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() < 1e-300 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::SolverFailure(
                    "tridiagonal QL did not converge in 50 sweeps".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let denom = g + if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / denom;
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in 0..rows {
                    let qi1 = q[[row, i + 1]];
                    let qi = q[[row, i]];
                    q[[row, i + 1]] = qi * s + qi1 * c;
                    q[[row, i]] = qi * c - qi1 * s;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// LU inverse with partial pivoting. Returns the inverse together with the
/// smallest pivot magnitude met along the way, so callers can judge how close
/// to singular the system was. An exactly zero pivot is an error.
pub fn lu_inverse(a: &Array2<Complex64>) -> Result<(Array2<Complex64>, f64)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::SolverFailure(
            "lu_inverse needs a square matrix".into(),
        ));
    }
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut min_pivot = f64::INFINITY;

    for k in 0..n {
        // Partial pivot.
        let mut piv_row = k;
        let mut piv_mag = lu[[k, k]].norm();
        for i in k + 1..n {
            let mag = lu[[i, k]].norm();
            if mag > piv_mag {
                piv_mag = mag;
                piv_row = i;
            }
        }
        if piv_mag == 0.0 {
            return Err(Error::SolverFailure("singular matrix in lu_inverse".into()));
        }
        min_pivot = min_pivot.min(piv_mag);
        if piv_row != k {
            for j in 0..n {
                let tmp = lu[[k, j]];
                lu[[k, j]] = lu[[piv_row, j]];
                lu[[piv_row, j]] = tmp;
            }
            perm.swap(k, piv_row);
        }
        let pivot = lu[[k, k]];
        for i in k + 1..n {
            let factor = lu[[i, k]] / pivot;
            lu[[i, k]] = factor;
            for j in k + 1..n {
                let sub = factor * lu[[k, j]];
                lu[[i, j]] -= sub;
            }
        }
    }

    // Solve A X = I column by column.
    let mut inv = Array2::<Complex64>::zeros((n, n));
    let mut col = vec![C_ZERO; n];
    for rhs in 0..n {
        for i in 0..n {
            col[i] = if perm[i] == rhs { C_ONE } else { C_ZERO };
        }
        for i in 0..n {
            for j in 0..i {
                let sub = lu[[i, j]] * col[j];
                col[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = lu[[i, j]] * col[j];
                col[i] -= sub;
            }
            col[i] /= lu[[i, i]];
        }
        for i in 0..n {
            inv[[i, rhs]] = col[i];
        }
    }
    Ok((inv, min_pivot))
}
