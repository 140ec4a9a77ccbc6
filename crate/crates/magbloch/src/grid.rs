//! Uniform mesh over one magnetic cell.
//!
//! The magnetic cell is spanned by `u₁ = q e₁` and `u₂ = e₂`; a grid of
//! `n₁ × n₂` sites covers it with steps `a₁ = u₁/n₁`, `a₂ = u₂/n₂`. The cell
//! is a torus: site indices wrap, and a wrap records which `Γ'` translation
//! was crossed so the fiber assembly can attach the right boundary phase.
//!
//! For oblique lattices the steps are not orthogonal; second derivatives mix.
//! The inverse Gram matrix `g = [aᵢ·aⱼ]⁻¹` of the steps carries the metric:
//! the (negative) Laplacian becomes `-Σ gⁱʲ ∂ᵢ∂ⱼ` in step coordinates, which
//! the stencil in `crate::fiber` reproduces with covariant differences.

use crate::error::Error;
use crate::lattice::{FluxRational, GammaPrime, Lattice, SublatticePrime};
use crate::vec2::Vec2;
use crate::Result;

/// Minimum sites per direction for the 9-point stencil to make sense.
pub const MIN_GRID: usize = 4;

/// Discretized magnetic cell.
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub n1: usize,
    pub n2: usize,
    /// Mesh steps `a₁ = q e₁ / n₁`, `a₂ = e₂ / n₂`.
    pub a1: Vec2,
    pub a2: Vec2,
    /// Inverse Gram matrix of the steps (symmetric 2×2).
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    /// Area measure carried by one site, `|a₁ ∧ a₂|`.
    pub site_weight: f64,
    pub lattice: Lattice,
    pub flux: FluxRational,
    pub sub: SublatticePrime,
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    /// Row-major site index.
    pub fn index(&self, s1: usize, s2: usize) -> usize {
        s1 * self.n2 + s2
    }

    /// Cartesian position of a site.
    pub fn site_position(&self, s1: usize, s2: usize) -> Vec2 {
        self.a1 * s1 as f64 + self.a2 * s2 as f64
    }

    /// Reduce possibly out-of-range indices onto the torus, reporting how many
    /// copies of `u₁`, `u₂` were crossed.
    pub fn wrap(&self, i1: i64, i2: i64) -> (usize, usize, GammaPrime) {
        let n1 = self.n1 as i64;
        let n2 = self.n2 as i64;
        let g1 = i1.div_euclid(n1);
        let g2 = i2.div_euclid(n2);
        let s1 = i1.rem_euclid(n1) as usize;
        let s2 = i2.rem_euclid(n2) as usize;
        (s1, s2, GammaPrime::new(g1, g2))
    }

    /// Quasi-momentum vector for dual-basis coefficients `(t₁, t₂)`.
    pub fn theta_vector(&self, t1: f64, t2: f64) -> Vec2 {
        self.sub.theta(t1, t2)
    }
}

/// Build the mesh for a given lattice and flux.
pub fn build_grid(lattice: &Lattice, flux: &FluxRational, n1: usize, n2: usize) -> Result<Grid> {
    if n1 < MIN_GRID || n2 < MIN_GRID {
        return Err(Error::TooCoarse {
            n1,
            n2,
            min: MIN_GRID,
        });
    }
    let sub = SublatticePrime::new(lattice, flux)?;
    let a1 = sub.u1 * (1.0 / n1 as f64);
    let a2 = sub.u2 * (1.0 / n2 as f64);
    let (p11, p12, p22) = (a1.dot(a1), a1.dot(a2), a2.dot(a2));
    let det = p11 * p22 - p12 * p12;
    // det = (a₁∧a₂)² > 0 whenever the lattice is nondegenerate.
    let g11 = p22 / det;
    let g12 = -p12 / det;
    let g22 = p11 / det;
    Ok(Grid {
        n1,
        n2,
        a1,
        a2,
        g11,
        g12,
        g22,
        site_weight: a1.wedge(a2).abs(),
        lattice: *lattice,
        flux: *flux,
        sub,
    })
}
