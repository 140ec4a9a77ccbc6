//! Band-limited real periodic potentials.
//!
//! A potential is a finite Fourier series over the dual lattice,
//!
//! ```text
//!     V(x) = Σ_m c_m exp(i K_m · x),    K_m = m₁b₁ + m₂b₂,
//! ```
//!
//! with `(b₁, b₂)` the 2π-dual of `(e₁, e₂)`. Reality of `V` is enforced
//! structurally: every mode must come with its conjugate partner
//! `c_{-m} = conj(c_m)`. The seeded generator draws such pairs uniformly and
//! rescales so that `Σ|c_m| = amplitude`, which bounds `sup|V|` by the
//! triangle inequality.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::lattice::Lattice;
use crate::vec2::Vec2;
use crate::Result;

/// One Fourier mode `c · exp(i(m₁b₁ + m₂b₂)·x)`.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    pub m1: i64,
    pub m2: i64,
    pub c: Complex64,
}

/// A validated real trigonometric potential on a lattice.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    modes: Vec<Mode>,
    b1: Vec2,
    b2: Vec2,
    sum_abs: f64,
}

impl PotentialSpec {
    /// Validate and freeze a mode list. Rejects duplicate mode indices and
    /// any mode whose conjugate partner is missing or mismatched beyond
    /// `1e-12 · max(1, Σ|c|)`.
    pub fn new(lattice: &Lattice, mut modes: Vec<Mode>) -> Result<Self> {
        modes.sort_by_key(|m| (m.m1, m.m2));
        for w in modes.windows(2) {
            if w[0].m1 == w[1].m1 && w[0].m2 == w[1].m2 {
                return Err(Error::InvalidPotential(format!(
                    "duplicate mode ({}, {})",
                    w[0].m1, w[0].m2
                )));
            }
        }
        let sum_abs: f64 = modes.iter().map(|m| m.c.norm()).sum();
        let tol = 1e-12 * sum_abs.max(1.0);
        for m in &modes {
            let partner = modes
                .binary_search_by_key(&(-m.m1, -m.m2), |k| (k.m1, k.m2))
                .map(|i| modes[i].c);
            match partner {
                Ok(c) if (c - m.c.conj()).norm() <= tol => {}
                Ok(_) => {
                    return Err(Error::InvalidPotential(format!(
                        "mode ({}, {}) breaks the reality condition c_-m = conj(c_m)",
                        m.m1, m.m2
                    )))
                }
                Err(_) => {
                    return Err(Error::InvalidPotential(format!(
                        "mode ({}, {}) has no conjugate partner",
                        m.m1, m.m2
                    )))
                }
            }
        }
        let (b1, b2) = lattice.dual();
        Ok(PotentialSpec {
            modes,
            b1,
            b2,
            sum_abs,
        })
    }

    /// The zero potential.
    pub fn zero(lattice: &Lattice) -> Self {
        let (b1, b2) = lattice.dual();
        PotentialSpec {
            modes: Vec::new(),
            b1,
            b2,
            sum_abs: 0.0,
        }
    }

    /// A constant potential `V ≡ v`.
    pub fn constant(lattice: &Lattice, v: f64) -> Self {
        let (b1, b2) = lattice.dual();
        let modes = vec![Mode {
            m1: 0,
            m2: 0,
            c: Complex64::new(v, 0.0),
        }];
        PotentialSpec {
            modes,
            b1,
            b2,
            sum_abs: v.abs(),
        }
    }

    /// Evaluate `V(x)`. The imaginary part cancels by the validated symmetry.
    pub fn evaluate(&self, x: Vec2) -> f64 {
        let mut sum = Complex64::ZERO;
        for m in &self.modes {
            let k = self.b1 * m.m1 as f64 + self.b2 * m.m2 as f64;
            sum += m.c * Complex64::from_polar(1.0, k.dot(x));
        }
        debug_assert!(
            sum.im.abs() <= 1e-12 * self.sum_abs.max(1.0),
            "imaginary residue {:.3e} exceeds reality tolerance",
            sum.im
        );
        sum.re
    }

    /// Sum of coefficient magnitudes: an a-priori bound for `sup|V|`.
    pub fn sum_abs_coeffs(&self) -> f64 {
        self.sum_abs
    }

    /// Largest pointwise magnitude over an `n × n` sampling of the unit cell.
    /// On nested samplings (n dividing n') the value is non-decreasing, and it
    /// is always bounded by `sum_abs_coeffs`.
    pub fn sup_norm(&self, lattice: &Lattice, n_grid: usize) -> f64 {
        let n = n_grid.max(1);
        let mut sup: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = lattice.point(i as f64 / n as f64, j as f64 / n as f64);
                sup = sup.max(self.evaluate(x).abs());
            }
        }
        sup
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn is_zero(&self) -> bool {
        self.sum_abs == 0.0
    }

    /// Real linear combination `ca·a + cb·b` of two potentials on the same
    /// lattice. Reality survives because the weights are real; modes that
    /// cancel exactly are dropped.
    pub fn linear_combination(a: &Self, ca: f64, b: &Self, cb: f64) -> Result<Self> {
        if (a.b1 - b.b1).norm() > 1e-12 || (a.b2 - b.b2).norm() > 1e-12 {
            return Err(Error::InvalidPotential(
                "cannot combine potentials defined on different lattices".into(),
            ));
        }
        let mut merged: std::collections::BTreeMap<(i64, i64), Complex64> =
            std::collections::BTreeMap::new();
        for m in &a.modes {
            *merged.entry((m.m1, m.m2)).or_insert(Complex64::ZERO) += m.c * ca;
        }
        for m in &b.modes {
            *merged.entry((m.m1, m.m2)).or_insert(Complex64::ZERO) += m.c * cb;
        }
        let modes: Vec<Mode> = merged
            .into_iter()
            .filter(|(_, c)| *c != Complex64::ZERO)
            .map(|((m1, m2), c)| Mode { m1, m2, c })
            .collect();
        let sum_abs: f64 = modes.iter().map(|m| m.c.norm()).sum();
        Ok(PotentialSpec {
            modes,
            b1: a.b1,
            b2: a.b2,
            sum_abs,
        })
    }
}

/// Draw a random band-limited real potential, deterministically in `seed`.
///
/// Modes fill `|m₁|, |m₂| <= max_harmonic` (excluding the constant mode, which
/// would only shift the spectrum), and coefficients are rescaled so that
/// `Σ|c_m| = amplitude` exactly; hence `sup|V| <= amplitude`.
pub fn random_potential(
    lattice: &Lattice,
    seed: u64,
    max_harmonic: i64,
    amplitude: f64,
) -> Result<PotentialSpec> {
    if max_harmonic < 0 {
        return Err(Error::InvalidPotential(format!(
            "max_harmonic must be >= 0, got {max_harmonic}"
        )));
    }
    if amplitude.is_nan() || amplitude < 0.0 {
        return Err(Error::InvalidPotential(format!(
            "amplitude must be >= 0, got {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut half = Vec::new();
    // One representative per conjugate pair: m₁ > 0, or m₁ = 0 with m₂ > 0.
    for m1 in 0..=max_harmonic {
        for m2 in -max_harmonic..=max_harmonic {
            if m1 == 0 && m2 <= 0 {
                continue;
            }
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            half.push(Mode { m1, m2, c });
        }
    }
    let raw_sum: f64 = 2.0 * half.iter().map(|m| m.c.norm()).sum::<f64>();
    let scale = if raw_sum > 0.0 {
        amplitude / raw_sum
    } else {
        0.0
    };
    let mut modes = Vec::with_capacity(2 * half.len());
    for m in half {
        let c = m.c * scale;
        modes.push(Mode {
            m1: m.m1,
            m2: m.m2,
            c,
        });
        modes.push(Mode {
            m1: -m.m1,
            m2: -m.m2,
            c: c.conj(),
        });
    }
    PotentialSpec::new(lattice, modes)
}
