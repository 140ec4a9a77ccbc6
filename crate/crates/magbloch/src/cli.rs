//! Subcommand drivers: a validated config in, deterministic artifacts out.
//!
//! Each driver builds the lattice/flux/grid/potential from the config, runs
//! one experiment from [`crate::bands`] (or the algebra verification), and
//! writes its artifacts into the output directory. Artifacts carry the
//! config fingerprint and are byte-for-byte reproducible; see
//! [`crate::output`].

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bands::{
    band_sweep, calibrated_threshold, first_order_slopes, flatness_test, flux_sweep, nodal_scan,
    BandStructure, GridPolicy, SlopeComparison, TrackerReport,
};
use crate::config::RunConfig;
use crate::eigensolve::eigensolve;
use crate::error::Error;
use crate::fiber::assemble;
use crate::output::{config_hash, write_band_csv, write_butterfly_csv, write_json_report};
use crate::translation::algebra_check;
use crate::Result;

/// The available subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    AlgebraCheck,
    Bands,
    Flatness,
    Perturb,
    Butterfly,
    Nodal,
}

impl CommandKind {
    /// CLI name, also the value an optional `"command"` config key must hold.
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::AlgebraCheck => "algebra-check",
            CommandKind::Bands => "bands",
            CommandKind::Flatness => "flatness",
            CommandKind::Perturb => "perturb",
            CommandKind::Butterfly => "butterfly",
            CommandKind::Nodal => "nodal",
        }
    }
}

/// What a driver produced: the files written, a one-line summary, and
/// whether any built-in check it ran came out clean.
#[derive(Debug)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// `false` only when the command itself embeds a pass/fail check (the
    /// algebra verification) and that check failed.
    pub ok: bool,
}

#[derive(Serialize)]
struct BandsArtifact {
    bands: usize,
    dispersions: Vec<f64>,
    max_dispersion: f64,
    empirical_lipschitz: f64,
    structure: BandStructure,
}

#[derive(Serialize)]
struct PerturbArtifact {
    tracker: TrackerReport,
    comparison: SlopeComparison,
}

/// Run one subcommand against a validated config.
pub fn run(kind: CommandKind, config: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    if let Some(declared) = &config.command {
        if declared != kind.name() {
            return Err(Error::Validation(vec![format!(
                "config declares command \"{declared}\" but \"{}\" was invoked",
                kind.name()
            )]));
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let hash = config_hash(config)?;

    let lattice = config.build_lattice()?;
    let flux = config.build_flux(&lattice)?;
    let bands = config.effective_bands();

    match kind {
        CommandKind::AlgebraCheck => {
            let report =
                algebra_check(&lattice, &flux, config.algebra.seed, config.algebra.checks)?;
            let path = out_dir.join("algebra_check.json");
            write_json_report(&path, config, &hash, &report)?;
            let worst = report
                .max_commutation_defect
                .max(report.max_composition_defect)
                .max(report.max_group_law_defect)
                .max(report.max_cell_power_defect);
            let verdict = if report.pass { "pass" } else { "FAIL" };
            Ok(RunOutcome {
                files: vec![path],
                summary: format!(
                    "algebra-check: {verdict} (worst defect {worst:.3e}, tolerance {:.1e})",
                    report.tolerance
                ),
                ok: report.pass,
            })
        }
        CommandKind::Bands => {
            let grid = config.build_grid(&lattice, &flux)?;
            let potential = config.build_potential(&lattice)?;
            let theta_grid = config.build_theta_grid()?;
            let structure = band_sweep(&grid, &potential, &theta_grid, bands)?;
            let artifact = BandsArtifact {
                bands,
                dispersions: (0..bands).map(|b| structure.dispersion(b)).collect(),
                max_dispersion: structure.max_dispersion(),
                empirical_lipschitz: structure.empirical_lipschitz(&grid),
                structure,
            };
            let csv = out_dir.join("bands.csv");
            let json = out_dir.join("bands.json");
            write_band_csv(&csv, &artifact.structure, &hash)?;
            write_json_report(&json, config, &hash, &artifact)?;
            Ok(RunOutcome {
                files: vec![csv, json],
                summary: format!(
                    "bands: {bands} bands on a {}x{} theta-grid, max dispersion {:.6e}",
                    theta_grid.m1, theta_grid.m2, artifact.max_dispersion
                ),
                ok: true,
            })
        }
        CommandKind::Flatness => {
            let grid = config.build_grid(&lattice, &flux)?;
            let potential = config.build_potential(&lattice)?;
            let theta_grid = config.build_theta_grid()?;
            let (threshold, _baseline) = calibrated_threshold(&grid, &theta_grid, bands)?;
            let structure = band_sweep(&grid, &potential, &theta_grid, bands)?;
            let report = flatness_test(&structure, &grid, &threshold);
            let path = out_dir.join("flatness.json");
            write_json_report(&path, config, &hash, &report)?;
            Ok(RunOutcome {
                files: vec![path],
                summary: format!(
                    "flatness: all_flat={}, any_dispersive={}, max dispersion {:.6e} vs threshold {:.6e}",
                    report.all_flat, report.any_dispersive, report.max_dispersion,
                    report.threshold.value
                ),
                ok: true,
            })
        }
        CommandKind::Perturb => {
            let grid = config.build_grid(&lattice, &flux)?;
            let potential = config.build_potential(&lattice)?;
            let direction = config.build_direction(&lattice)?;
            let (tracker, comparison) = first_order_slopes(
                &grid,
                &potential,
                &direction,
                config.theta_pair(),
                &config.perturb.t_values,
                bands,
                config.perturb.level,
            )?;
            let artifact = PerturbArtifact {
                tracker,
                comparison,
            };
            let path = out_dir.join("perturb.json");
            write_json_report(&path, config, &hash, &artifact)?;
            Ok(RunOutcome {
                files: vec![path],
                summary: format!(
                    "perturb: level {} (multiplicity {}), max slope mismatch {:.6e}",
                    artifact.comparison.level,
                    artifact.comparison.multiplicity,
                    artifact.comparison.max_mismatch
                ),
                ok: true,
            })
        }
        CommandKind::Butterfly => {
            let potential = config.build_potential(&lattice)?;
            let fractions: Vec<(i64, i64)> = config
                .butterfly
                .fractions
                .iter()
                .map(|f| (f[0], f[1]))
                .collect();
            let policy = if config.butterfly.per_unit_cell {
                GridPolicy::PerUnitCell {
                    n1: config.grid.n1,
                    n2: config.grid.n2,
                }
            } else {
                GridPolicy::Fixed {
                    n1: config.grid.n1,
                    n2: config.grid.n2,
                }
            };
            let report = flux_sweep(
                &lattice,
                &fractions,
                policy,
                config.theta_pair(),
                &potential,
                bands,
            );
            let csv = out_dir.join("butterfly.csv");
            let json = out_dir.join("butterfly.json");
            write_butterfly_csv(&csv, &report, &hash)?;
            write_json_report(&json, config, &hash, &report)?;
            let solved = report.points.iter().filter(|p| p.error.is_none()).count();
            Ok(RunOutcome {
                files: vec![csv, json],
                summary: format!(
                    "butterfly: {solved}/{} flux points solved, {bands} bands each",
                    report.points.len()
                ),
                ok: true,
            })
        }
        CommandKind::Nodal => {
            let grid = config.build_grid(&lattice, &flux)?;
            let potential = config.build_potential(&lattice)?;
            // The scan needs the neighbour above the target band to certify
            // isolation, so always compute at least band + 2 eigenvalues.
            let needed = bands.max(config.nodal.band + 2);
            let op = assemble(&grid, &potential, config.theta_pair());
            let solution = eigensolve(&op, needed.min(grid.dim()))?;
            let report = nodal_scan(&solution, config.nodal.band, &grid, config.nodal.zero_tol)?;
            let path = out_dir.join("nodal.json");
            write_json_report(&path, config, &hash, &report)?;
            let kinds: Vec<&str> = report
                .components
                .iter()
                .map(|c| c.classification.as_str())
                .collect();
            Ok(RunOutcome {
                files: vec![path],
                summary: format!(
                    "nodal: band {} has {} flagged sites in {} component(s) [{}]",
                    report.band,
                    report.flagged_sites,
                    report.components.len(),
                    kinds.join(", ")
                ),
                ok: true,
            })
        }
    }
}
