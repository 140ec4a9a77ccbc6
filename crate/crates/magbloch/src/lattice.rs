//! Lattices, rational flux, and the magnetic sublattice.
//!
//! A lattice `Γ = ℤe₁ ⊕ ℤe₂` fixes the potential's periodicity. The field
//! strength is never chosen independently: given a flux fraction `p/q` in
//! lowest terms, the field is
//!
//! ```text
//!     B = 2π p / (q · e₁∧e₂),
//! ```
//!
//! so that the flux through a unit cell is exactly `2π p/q` and the flux
//! through the magnetic cell spanned by `u₁ = q e₁`, `u₂ = e₂` is `2π p` —
//! an integer number of quanta, which is what makes the twisted boundary
//! conditions on the magnetic cell consistent. The sublattice
//! `Γ' = ℤu₁ ⊕ ℤu₂` and its `2π`-dual basis `(f₁, f₂)` parameterize the
//! quasi-momentum torus.

use serde::Serialize;

use crate::error::Error;
use crate::vec2::Vec2;
use crate::Result;

/// Relative collinearity threshold for lattice vectors.
const DEGENERACY_TOL: f64 = 1e-12;

/// The periodicity lattice `Γ` of the potential.
#[derive(Debug, Clone, Copy)]
pub struct Lattice {
    e1: Vec2,
    e2: Vec2,
    /// Signed unit-cell area `e₁ ∧ e₂`.
    cell_area: f64,
    /// Dual basis with `eᵢ · bⱼ = 2π δᵢⱼ`.
    b1: Vec2,
    b2: Vec2,
}

impl Lattice {
    /// Build a lattice from two independent vectors.
    pub fn new(e1: Vec2, e2: Vec2) -> Result<Self> {
        let wedge = e1.wedge(e2);
        if wedge.abs() <= DEGENERACY_TOL * e1.norm() * e2.norm() {
            return Err(Error::DegenerateLattice { wedge });
        }
        let (b1, b2) = dual_basis(e1, e2)?;
        Ok(Lattice {
            e1,
            e2,
            cell_area: wedge,
            b1,
            b2,
        })
    }

    /// Square lattice with side 1; the default in most experiments.
    pub fn unit_square() -> Self {
        Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0))
            .expect("unit square is nondegenerate")
    }

    pub fn e1(&self) -> Vec2 {
        self.e1
    }

    pub fn e2(&self) -> Vec2 {
        self.e2
    }

    /// Signed area `e₁ ∧ e₂` of the unit cell.
    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }

    /// Dual basis vectors `(b₁, b₂)` with `eᵢ · bⱼ = 2π δᵢⱼ`.
    pub fn dual(&self) -> (Vec2, Vec2) {
        (self.b1, self.b2)
    }

    /// The point `c₁ e₁ + c₂ e₂`.
    pub fn point(&self, c1: f64, c2: f64) -> Vec2 {
        self.e1 * c1 + self.e2 * c2
    }
}

/// Solve `uᵢ · fⱼ = 2π δᵢⱼ` for the dual pair `(f₁, f₂)`.
pub fn dual_basis(u1: Vec2, u2: Vec2) -> Result<(Vec2, Vec2)> {
    let wedge = u1.wedge(u2);
    if wedge.abs() <= DEGENERACY_TOL * u1.norm() * u2.norm() {
        return Err(Error::DegenerateLattice { wedge });
    }
    // Rotate each basis vector by 90° and normalize against the signed area:
    // f₁ ⟂ u₂ and f₂ ⟂ u₁.
    let f1 = Vec2::new(u2.y, -u2.x) * (2.0 * std::f64::consts::PI / wedge);
    let f2 = Vec2::new(-u1.y, u1.x) * (2.0 * std::f64::consts::PI / wedge);
    Ok((f1, f2))
}

/// A rational flux `p/q` in lowest terms together with the induced field `B`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluxRational {
    /// Numerator; carries the sign of the field.
    pub p: i64,
    /// Denominator; always >= 1.
    pub q: i64,
    /// Field strength `B = 2π p / (q e₁∧e₂)`.
    pub b: f64,
}

impl FluxRational {
    /// Flux through one unit cell divided by 2π, i.e. `p/q` as a float.
    pub fn per_cell(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Build the flux with `B` derived from the fraction. The fraction is reduced
/// and the sign normalized onto `p`, so `make_flux(l, 2, 4)` and
/// `make_flux(l, -1, -2)` both yield `1/2`.
pub fn make_flux(lattice: &Lattice, p: i64, q: i64) -> Result<FluxRational> {
    if q == 0 {
        return Err(Error::InvalidFlux { p, q });
    }
    let sign = if q < 0 { -1 } else { 1 };
    let (mut p, q) = (sign * p, sign * q);
    let g = gcd(p, q).max(1);
    let (p_red, q_red) = (p / g, q / g);
    p = p_red;
    let b = 2.0 * std::f64::consts::PI * p as f64 / (q_red as f64 * lattice.cell_area());
    Ok(FluxRational { p, q: q_red, b })
}

/// Recover the smallest-denominator rational flux compatible with a measured
/// field: scans `q = 1..=q_max` and accepts the first `p/q` within `tol` of
/// `B·(e₁∧e₂)/2π`. The returned flux has `B` snapped onto the exact fraction.
pub fn detect_flux(b: f64, lattice: &Lattice, q_max: i64, tol: f64) -> Result<FluxRational> {
    let target = b * lattice.cell_area() / (2.0 * std::f64::consts::PI);
    for q in 1..=q_max.max(1) {
        let p = (target * q as f64).round() as i64;
        if (target - p as f64 / q as f64).abs() <= tol {
            return make_flux(lattice, p, q);
        }
    }
    Err(Error::NotRational {
        value: target,
        q_max,
        tol,
    })
}

/// The magnetic sublattice `Γ' = ℤu₁ ⊕ ℤu₂` with `u₁ = q e₁`, `u₂ = e₂`,
/// and its `2π`-dual basis.
#[derive(Debug, Clone, Copy)]
pub struct SublatticePrime {
    pub u1: Vec2,
    pub u2: Vec2,
    pub f1: Vec2,
    pub f2: Vec2,
    pub q: i64,
}

impl SublatticePrime {
    pub fn new(lattice: &Lattice, flux: &FluxRational) -> Result<Self> {
        let u1 = lattice.e1() * flux.q as f64;
        let u2 = lattice.e2();
        let (f1, f2) = dual_basis(u1, u2)?;
        Ok(SublatticePrime {
            u1,
            u2,
            f1,
            f2,
            q: flux.q,
        })
    }

    /// Cartesian coordinates of the sublattice vector `g₁u₁ + g₂u₂`.
    pub fn vector(&self, g: GammaPrime) -> Vec2 {
        self.u1 * g.g1 as f64 + self.u2 * g.g2 as f64
    }

    /// Quasi-momentum with coefficients `(t₁, t₂)` in the dual basis.
    pub fn theta(&self, t1: f64, t2: f64) -> Vec2 {
        self.f1 * t1 + self.f2 * t2
    }
}

/// Integer coefficients of a `Γ'` vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaPrime {
    pub g1: i64,
    pub g2: i64,
}

impl GammaPrime {
    pub const fn new(g1: i64, g2: i64) -> Self {
        GammaPrime { g1, g2 }
    }
}
