//! Magnetic Bloch bands for the Landau Hamiltonian with rational flux.
//!
//! The continuum operator is `H = (-i∇ - A)² + V` on the plane, with a uniform
//! magnetic field `B` in the symmetric gauge `A(x) = (B/2)(-x₂, x₁)` and a
//! potential `V` that is periodic with respect to a lattice `Γ = ℤe₁ ⊕ ℤe₂`.
//! When the flux through a unit cell is a rational multiple of 2π,
//!
//! ```text
//!     B · (e₁ ∧ e₂) = 2π p/q,     gcd(|p|, q) = 1,
//! ```
//!
//! the magnetic translations along the sublattice `Γ' = qℤe₁ ⊕ ℤe₂` can be
//! corrected by a sign character into a commuting family, and `H` decomposes
//! into a direct integral of fiber operators `H(θ, V)` over the dual torus.
//! Each fiber acts on functions over one magnetic cell (area `q·e₁∧e₂`,
//! carrying `p` flux quanta) with twisted boundary conditions, has discrete
//! spectrum, and yields band functions `E_n(θ)`.
//!
//! This crate builds the fibers by a gauge-covariant (Peierls) finite
//! difference discretization, solves them, and provides the band-level
//! experiments: flatness measurement (at `V = 0` every band is a flat Landau
//! level `B(2n+1)` with exactly `p` states per fiber), perturbation of the
//! degenerate levels, flux sweeps, and nodal-set scans of eigenfunctions.
//!
//! The `magbloch` binary drives all of this from a JSON config; see the
//! crate-level README for the schema and the CLI commands.

pub mod bands;
pub mod cli;
pub mod config;
pub mod eigensolve;
pub mod error;
pub mod fiber;
pub mod grid;
pub mod lattice;
pub mod linalg;
pub mod output;
pub mod potential;
pub mod projector;
pub mod translation;
pub mod vec2;

pub use bands::{
    band_sweep, calibrated_threshold, degeneracy_tracker, first_order_slopes, flatness_test,
    flux_sweep, genericity_experiment, nodal_scan, BandStructure, FlatnessReport, GridPolicy,
    SlopeComparison, ThetaGrid, TrackerReport,
};
pub use config::{parse_config, PotentialConfig, RunConfig};
pub use eigensolve::{eigensolve, eigensolve_matrix, EigenSolution};
pub use error::Error;
pub use fiber::{assemble, FiberOperator};
pub use grid::{build_grid, Grid};
pub use lattice::{
    detect_flux, dual_basis, make_flux, FluxRational, GammaPrime, Lattice, SublatticePrime,
};
pub use potential::{random_potential, PotentialSpec};
pub use projector::{
    gram_orthonormalize, hellmann_feynman, reduced_matrix, riesz_projector,
    riesz_projector_contour, SpectralProjector,
};
pub use translation::{
    algebra_check, commutation_phase, magnetic_translate, theta_phase, weyl_translate,
    AlgebraReport,
};
pub use vec2::Vec2;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
