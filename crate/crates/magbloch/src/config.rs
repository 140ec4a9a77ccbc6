//! JSON run configuration: schema, defaults, validation, and builders.
//!
//! One config file drives every subcommand; unknown keys are rejected so a
//! typo cannot silently fall back to a default. Validation collects *all*
//! problems into a single [`Error::Validation`] instead of stopping at the
//! first, and the builders below turn the validated config into the lattice,
//! flux, grid, and potential objects the solver works with.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bands::ThetaGrid;
use crate::error::Error;
use crate::grid::{build_grid, Grid, MIN_GRID};
use crate::lattice::{make_flux, FluxRational, Lattice};
use crate::potential::{random_potential, Mode, PotentialSpec};
use crate::vec2::Vec2;
use crate::Result;

/// Hard cap on sites per fiber; a dense fiber matrix at this size is ~1 GiB.
pub const MAX_SITES: usize = 8192;

/// Lattice basis in Cartesian coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub e1: [f64; 2],
    pub e2: [f64; 2],
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            e1: [1.0, 0.0],
            e2: [0.0, 1.0],
        }
    }
}

/// Rational flux per unit cell, `2π p/q` through `e₁∧e₂`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    pub p: i64,
    pub q: i64,
}

impl Default for FluxConfig {
    fn default() -> Self {
        FluxConfig { p: 1, q: 1 }
    }
}

/// Mesh of the magnetic cell (which spans `q` unit cells along `e₁`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n1: usize,
    pub n2: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n1: 32, n2: 32 }
    }
}

/// Sampling of the dual torus in dual-basis coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGridConfig {
    pub m1: usize,
    pub m2: usize,
}

impl Default for ThetaGridConfig {
    fn default() -> Self {
        ThetaGridConfig { m1: 8, m2: 8 }
    }
}

/// One Fourier mode `c · exp(2πi(m₁ c₁ + m₂ c₂))` plus its conjugate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub m: [i64; 2],
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Potential selector. Externally tagged:
/// `"zero"`, `{"constant": {...}}`, `{"random": {...}}`, `{"modes": {...}}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    /// `V = 0`.
    #[default]
    Zero,
    /// Constant potential; shifts the spectrum rigidly.
    Constant { value: f64 },
    /// Seeded random trigonometric polynomial with `Σ|c| = amplitude` and
    /// harmonics up to `max_harmonic` in each direction.
    Random {
        amplitude: f64,
        max_harmonic: i64,
        seed: u64,
    },
    /// Explicit mode list; each entry contributes `c e_K + c̄ e_{-K}` (with
    /// `K = m₁b₁ + m₂b₂`), so the result is real. Repeated indices add.
    /// The `[0, 0]` entry is a plain constant and must have `im = 0`.
    Modes { modes: Vec<ModeConfig> },
}

/// Settings for the `perturb` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbConfig {
    /// Perturbing direction `U`; the solved family is `V + t·U`.
    #[serde(default = "default_direction")]
    pub direction: PotentialConfig,
    /// Coupling values; must contain `0`.
    #[serde(default = "default_t_values")]
    pub t_values: Vec<f64>,
    /// Tracked level whose slopes are compared against first-order theory.
    #[serde(default)]
    pub level: usize,
}

fn default_direction() -> PotentialConfig {
    PotentialConfig::Random {
        amplitude: 0.4,
        max_harmonic: 1,
        seed: 3,
    }
}

fn default_t_values() -> Vec<f64> {
    vec![0.0, 5e-4, 1e-3, 2e-3]
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            direction: default_direction(),
            t_values: default_t_values(),
            level: 0,
        }
    }
}

/// Settings for the `butterfly` command (band energies versus flux).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ButterflyConfig {
    /// Flux fractions `[p, q]` to sweep; reduced and deduplicated.
    pub fractions: Vec<[i64; 2]>,
    /// Scale the mesh with `q` (same resolution per unit cell) instead of
    /// keeping it fixed per magnetic cell.
    #[serde(default = "default_true")]
    pub per_unit_cell: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ButterflyConfig {
    fn default() -> Self {
        ButterflyConfig {
            fractions: vec![[1, 4], [1, 3], [1, 2], [2, 3], [3, 4], [1, 1]],
            per_unit_cell: true,
        }
    }
}

/// Settings for the `nodal` command (zero-set scan of one eigenfunction).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalConfig {
    /// Band index of the scanned eigenfunction.
    #[serde(default)]
    pub band: usize,
    /// Sites with `|ψ| ≤ zero_tol · max|ψ|` are flagged as near-zeros.
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
}

fn default_zero_tol() -> f64 {
    0.1
}

impl Default for NodalConfig {
    fn default() -> Self {
        NodalConfig {
            band: 0,
            zero_tol: default_zero_tol(),
        }
    }
}

/// Settings for the `algebra-check` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    /// Random samples per identity family.
    #[serde(default = "default_checks")]
    pub checks: usize,
    #[serde(default = "default_algebra_seed")]
    pub seed: u64,
}

fn default_checks() -> usize {
    64
}

fn default_algebra_seed() -> u64 {
    1
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        AlgebraConfig {
            checks: default_checks(),
            seed: default_algebra_seed(),
        }
    }
}

/// Top-level run configuration. Every field has a default, so `{}` is a
/// valid config (unit lattice, flux 1/1, 32×32 mesh, zero potential).
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Optional guard: when present it must equal the invoked subcommand.
    pub command: Option<String>,
    pub lattice: LatticeConfig,
    pub flux: FluxConfig,
    pub grid: GridConfig,
    pub theta_grid: ThetaGridConfig,
    /// Fiber parameter in dual-basis coefficients, used by the single-θ
    /// commands (`perturb`, `butterfly`, `nodal`).
    pub theta: [f64; 2],
    /// Bands per fiber; defaults to `4·max(1, |p|)`.
    pub bands: Option<usize>,
    pub potential: PotentialConfig,
    pub perturb: PerturbConfig,
    pub butterfly: ButterflyConfig,
    pub nodal: NodalConfig,
    pub algebra: AlgebraConfig,
}

impl RunConfig {
    /// Bands per fiber after applying the `4·max(1, |p|)` default.
    pub fn effective_bands(&self) -> usize {
        self.bands
            .unwrap_or_else(|| 4 * (self.flux.p.unsigned_abs().max(1) as usize))
    }

    pub fn theta_pair(&self) -> (f64, f64) {
        (self.theta[0], self.theta[1])
    }

    pub fn build_lattice(&self) -> Result<Lattice> {
        Lattice::new(
            Vec2::new(self.lattice.e1[0], self.lattice.e1[1]),
            Vec2::new(self.lattice.e2[0], self.lattice.e2[1]),
        )
    }

    pub fn build_flux(&self, lattice: &Lattice) -> Result<FluxRational> {
        make_flux(lattice, self.flux.p, self.flux.q)
    }

    pub fn build_grid(&self, lattice: &Lattice, flux: &FluxRational) -> Result<Grid> {
        build_grid(lattice, flux, self.grid.n1, self.grid.n2)
    }

    pub fn build_theta_grid(&self) -> Result<ThetaGrid> {
        ThetaGrid::new(self.theta_grid.m1, self.theta_grid.m2)
    }

    pub fn build_potential(&self, lattice: &Lattice) -> Result<PotentialSpec> {
        build_potential_from(&self.potential, lattice)
    }

    pub fn build_direction(&self, lattice: &Lattice) -> Result<PotentialSpec> {
        build_potential_from(&self.perturb.direction, lattice)
    }

    /// Collect every validation problem; empty means the config is usable.
    fn problems(&self) -> Vec<String> {
        let mut errs = Vec::new();

        let finite = |v: [f64; 2]| v[0].is_finite() && v[1].is_finite();
        if !finite(self.lattice.e1) || !finite(self.lattice.e2) {
            errs.push("lattice: basis vectors must be finite".into());
        } else if let Err(e) = self.build_lattice() {
            errs.push(format!("lattice: {e}"));
        }

        if self.flux.q == 0 {
            errs.push("flux.q: must be nonzero".into());
        }
        if self.flux.p == 0 {
            errs.push("flux.p: must be nonzero (zero field has no magnetic cell)".into());
        }
        if self.flux.p.unsigned_abs() > 64 || self.flux.q.unsigned_abs() > 64 {
            errs.push("flux: |p| and |q| are capped at 64".into());
        }

        if self.grid.n1 < MIN_GRID || self.grid.n2 < MIN_GRID {
            errs.push(format!(
                "grid: n1 and n2 must be at least {MIN_GRID} (got {}×{})",
                self.grid.n1, self.grid.n2
            ));
        }
        if self.grid.n1.saturating_mul(self.grid.n2) > MAX_SITES {
            errs.push(format!(
                "grid: n1·n2 = {} exceeds the {MAX_SITES}-site cap",
                self.grid.n1.saturating_mul(self.grid.n2)
            ));
        }

        if self.theta_grid.m1 == 0 || self.theta_grid.m2 == 0 {
            errs.push("theta_grid: m1 and m2 must be positive".into());
        }
        if !self.theta[0].is_finite() || !self.theta[1].is_finite() {
            errs.push("theta: components must be finite".into());
        }

        if self.bands == Some(0) {
            errs.push("bands: must be positive when given".into());
        }

        validate_potential(&self.potential, "potential", &mut errs);
        validate_potential(&self.perturb.direction, "perturb.direction", &mut errs);
        if matches!(self.perturb.direction, PotentialConfig::Zero) {
            errs.push("perturb.direction: must not be the zero potential".into());
        }
        if self.perturb.t_values.is_empty() {
            errs.push("perturb.t_values: must not be empty".into());
        } else {
            if self.perturb.t_values.iter().any(|t| !t.is_finite()) {
                errs.push("perturb.t_values: all values must be finite".into());
            }
            if !self.perturb.t_values.contains(&0.0) {
                errs.push("perturb.t_values: must contain 0 (the unperturbed point)".into());
            }
        }

        if self.butterfly.fractions.is_empty() {
            errs.push("butterfly.fractions: must not be empty".into());
        }

        if !(self.nodal.zero_tol > 0.0 && self.nodal.zero_tol < 1.0) {
            errs.push("nodal.zero_tol: must lie strictly between 0 and 1".into());
        }
        let bands = self.effective_bands();
        if self.nodal.band >= bands {
            errs.push(format!(
                "nodal.band: {} is out of range for {bands} bands",
                self.nodal.band
            ));
        }
        if self.perturb.level >= bands {
            errs.push(format!(
                "perturb.level: {} is out of range for {bands} bands",
                self.perturb.level
            ));
        }

        if self.algebra.checks == 0 {
            errs.push("algebra.checks: must be positive".into());
        }

        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.problems();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

fn validate_potential(p: &PotentialConfig, field: &str, errs: &mut Vec<String>) {
    match p {
        PotentialConfig::Zero => {}
        PotentialConfig::Constant { value } => {
            if !value.is_finite() {
                errs.push(format!("{field}.constant.value: must be finite"));
            }
        }
        PotentialConfig::Random {
            amplitude,
            max_harmonic,
            ..
        } => {
            if amplitude.is_nan() || *amplitude <= 0.0 || !amplitude.is_finite() {
                errs.push(format!(
                    "{field}.random.amplitude: must be positive and finite"
                ));
            }
            if *max_harmonic < 1 || *max_harmonic > 16 {
                errs.push(format!("{field}.random.max_harmonic: must lie in 1..=16"));
            }
        }
        PotentialConfig::Modes { modes } => {
            if modes.is_empty() {
                errs.push(format!("{field}.modes: must not be empty"));
            }
            for (i, m) in modes.iter().enumerate() {
                if !m.re.is_finite() || !m.im.is_finite() {
                    errs.push(format!("{field}.modes[{i}]: coefficients must be finite"));
                }
                if m.m[0].unsigned_abs() > 64 || m.m[1].unsigned_abs() > 64 {
                    errs.push(format!("{field}.modes[{i}].m: harmonics are capped at 64"));
                }
                if m.m == [0, 0] && m.im != 0.0 {
                    errs.push(format!(
                        "{field}.modes[{i}]: the [0, 0] mode must be real (im = 0)"
                    ));
                }
            }
        }
    }
}

fn build_potential_from(p: &PotentialConfig, lattice: &Lattice) -> Result<PotentialSpec> {
    match p {
        PotentialConfig::Zero => Ok(PotentialSpec::zero(lattice)),
        PotentialConfig::Constant { value } => Ok(PotentialSpec::constant(lattice, *value)),
        PotentialConfig::Random {
            amplitude,
            max_harmonic,
            seed,
        } => random_potential(lattice, *seed, *max_harmonic, *amplitude),
        PotentialConfig::Modes { modes } => {
            // Each entry adds its conjugate partner so the result is real;
            // repeated indices accumulate. The zero mode is its own partner.
            let mut acc: std::collections::BTreeMap<(i64, i64), num_complex::Complex64> =
                std::collections::BTreeMap::new();
            for m in modes {
                let c = num_complex::Complex64::new(m.re, m.im);
                if m.m == [0, 0] {
                    *acc.entry((0, 0)).or_default() += num_complex::Complex64::new(m.re, 0.0);
                } else {
                    *acc.entry((m.m[0], m.m[1])).or_default() += c;
                    *acc.entry((-m.m[0], -m.m[1])).or_default() += c.conj();
                }
            }
            let list: Vec<Mode> = acc
                .into_iter()
                .map(|((m1, m2), c)| Mode { m1, m2, c })
                .collect();
            PotentialSpec::new(lattice, list)
        }
    }
}

/// Read, parse, and validate a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}
