//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building lattices, fibers, or reports.
#[derive(Debug, Error)]
pub enum Error {
    /// Lattice vectors are (numerically) collinear.
    #[error("degenerate lattice: |e1 ∧ e2| = {wedge:.3e} is below the collinearity threshold")]
    DegenerateLattice { wedge: f64 },

    /// `detect_flux` found no rational p/q within tolerance.
    #[error("flux {value:.12} is not rational within tol {tol:.1e} for q <= {q_max}")]
    NotRational { value: f64, q_max: i64, tol: f64 },

    /// Bad p/q input (q = 0).
    #[error("invalid flux fraction {p}/{q}: q must be nonzero")]
    InvalidFlux { p: i64, q: i64 },

    /// Fourier coefficients do not satisfy the reality condition, or modes repeat.
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    /// Grid too coarse to carry the stencil.
    #[error("grid {n1}x{n2} too coarse: both sides must be >= {min}")]
    TooCoarse { n1: usize, n2: usize, min: usize },

    /// Asked for more eigenpairs than the fiber dimension.
    #[error("requested {requested} eigenpairs from a dimension-{dim} operator")]
    BandCount { requested: usize, dim: usize },

    /// Iterative or dense eigensolver could not meet its residual contract.
    #[error("eigensolver failure: {0}")]
    SolverFailure(String),

    /// A spectral disk boundary passes too close to an eigenvalue.
    #[error("eigenvalue within {distance:.3e} of the contour (tolerance {tol:.1e})")]
    EigenvalueOnContour { distance: f64, tol: f64 },

    /// A quadrature node of the resolvent contour is nearly singular.
    #[error("resolvent nearly singular at contour node z = {re:.6} + {im:.6}i")]
    NearSingularResolvent { re: f64, im: f64 },

    /// Gram matrix of projected frame is numerically rank deficient.
    #[error("basis continuation lost: smallest Gram eigenvalue {min_eig:.3e} <= {tol:.1e}")]
    ContinuationLost { min_eig: f64, tol: f64 },

    /// Nodal scan refused: the chosen level is not spectrally isolated.
    #[error("band {band} is degenerate (gap {gap:.3e}); nodal scan is basis-dependent")]
    DegenerateLevel { band: usize, gap: f64 },

    /// Aggregated config validation failure; one entry per offending field.
    #[error("invalid config:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    /// I/O failure while reading configs or writing reports.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Config file is not parseable JSON (or has unknown/mistyped keys).
    #[error("config parse error: {0}")]
    ConfigParse(String),
}

impl Error {
    /// Stable machine-readable tag, used in the CLI's stderr error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateLattice { .. } => "degenerate_lattice",
            Error::NotRational { .. } => "not_rational",
            Error::InvalidFlux { .. } => "invalid_flux",
            Error::InvalidPotential(_) => "invalid_potential",
            Error::TooCoarse { .. } => "too_coarse",
            Error::BandCount { .. } => "band_count",
            Error::SolverFailure(_) => "solver_failure",
            Error::EigenvalueOnContour { .. } => "eigenvalue_on_contour",
            Error::NearSingularResolvent { .. } => "near_singular_resolvent",
            Error::ContinuationLost { .. } => "continuation_lost",
            Error::DegenerateLevel { .. } => "degenerate_level",
            Error::Validation(_) => "validation",
            Error::Io(_) => "io",
            Error::ConfigParse(_) => "config_parse",
        }
    }
}
