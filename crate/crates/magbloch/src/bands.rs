//! Band functions over the dual torus and the experiments built on them.
//!
//! A `ThetaGrid` samples the quasi-momentum torus at `θ = (j₁/M₁)f₁' +
//! (j₂/M₂)f₂'` without duplicating the periodic endpoint. `band_sweep` solves
//! every fiber on such a grid and records the lowest band functions; the
//! analyses on top are:
//!
//! * **flatness** — the dispersion `max_θ E_n − min_θ E_n` per band, judged
//!   against a threshold calibrated on the same mesh: ten times the defect the
//!   sweep measures at `V = 0`, where every band is an exactly flat Landau
//!   level and anything nonzero is discretization plus solver noise.
//! * **degeneracy tracking** — follow a degenerate level through `V + tU`,
//!   watching its cluster split inside a spectral window, with per-branch
//!   slopes fitted on the smallest positive `t`.
//! * **genericity** — many random potentials at fixed amplitude versus the
//!   constant-potential control.
//! * **flux sweeps** — the same lattice and potential across a list of
//!   rational fluxes, errors isolated per fraction.
//! * **nodal scans** — size and shape of the near-zero set of a chosen
//!   eigenfunction, on the torus, with a gradient probe at the flagged sites.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolve::{cluster_eigenvalues, eigensolve, EigenSolution, CLUSTER_TOL};
use crate::error::Error;
use crate::fiber::{assemble, wrap_fetch};
use crate::grid::{build_grid, Grid};
use crate::lattice::{make_flux, Lattice};
use crate::linalg;
use crate::potential::{random_potential, PotentialSpec};
use crate::Result;

// ───────────────────────────── θ sampling ────────────────────────────────

/// Uniform sampling of the dual torus in dual-basis coefficients,
/// `t_i = j_i / M_i` for `j_i = 0, …, M_i − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThetaGrid {
    pub m1: usize,
    pub m2: usize,
}

impl ThetaGrid {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::Validation(vec![format!(
                "theta grid must have at least one point per direction, got {m1}x{m2}"
            )]));
        }
        Ok(ThetaGrid { m1, m2 })
    }

    pub fn len(&self) -> usize {
        self.m1 * self.m2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, j1: usize, j2: usize) -> usize {
        j1 * self.m2 + j2
    }

    pub fn coefficients(&self, j1: usize, j2: usize) -> (f64, f64) {
        (j1 as f64 / self.m1 as f64, j2 as f64 / self.m2 as f64)
    }

    /// All points in row-major order as `(j1, j2, t1, t2)`.
    pub fn points(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for j1 in 0..self.m1 {
            for j2 in 0..self.m2 {
                let (t1, t2) = self.coefficients(j1, j2);
                out.push((j1, j2, t1, t2));
            }
        }
        out
    }
}

/// Band energies on a θ-grid: `energies[point][band]`, both ascending in the
/// band index and row-major in the grid index.
#[derive(Debug, Clone, Serialize)]
pub struct BandStructure {
    pub theta_grid: ThetaGrid,
    pub bands: usize,
    pub energies: Vec<Vec<f64>>,
}

impl BandStructure {
    pub fn energy(&self, j1: usize, j2: usize, band: usize) -> f64 {
        self.energies[self.theta_grid.index(j1, j2)][band]
    }

    pub fn band_min(&self, band: usize) -> f64 {
        self.energies
            .iter()
            .map(|e| e[band])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn band_max(&self, band: usize) -> f64 {
        self.energies
            .iter()
            .map(|e| e[band])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Dispersion `max_θ E_n − min_θ E_n` of one band.
    pub fn dispersion(&self, band: usize) -> f64 {
        self.band_max(band) - self.band_min(band)
    }

    pub fn max_dispersion(&self) -> f64 {
        (0..self.bands)
            .map(|b| self.dispersion(b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_energy(&self) -> f64 {
        self.energies
            .iter()
            .flat_map(|e| e.iter())
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// Largest |ΔE| / |Δθ| over torus-adjacent grid pairs: an empirical lower
    /// bound for the Lipschitz constant of the band functions.
    pub fn empirical_lipschitz(&self, grid: &Grid) -> f64 {
        let (m1, m2) = (self.theta_grid.m1, self.theta_grid.m2);
        let step1 = grid.sub.f1.norm() / m1 as f64;
        let step2 = grid.sub.f2.norm() / m2 as f64;
        let mut worst: f64 = 0.0;
        for j1 in 0..m1 {
            for j2 in 0..m2 {
                let here = &self.energies[self.theta_grid.index(j1, j2)];
                let right = &self.energies[self.theta_grid.index((j1 + 1) % m1, j2)];
                let up = &self.energies[self.theta_grid.index(j1, (j2 + 1) % m2)];
                for b in 0..self.bands {
                    if m1 > 1 {
                        worst = worst.max((right[b] - here[b]).abs() / step1);
                    }
                    if m2 > 1 {
                        worst = worst.max((up[b] - here[b]).abs() / step2);
                    }
                }
            }
        }
        worst
    }
}

/// Solve every fiber on the θ-grid. Points are independent, so they run in
/// parallel; the result order is fixed by the grid, not by scheduling.
pub fn band_sweep(
    grid: &Grid,
    potential: &PotentialSpec,
    theta_grid: &ThetaGrid,
    bands: usize,
) -> Result<BandStructure> {
    let points = theta_grid.points();
    let energies: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&(_, _, t1, t2)| {
            let op = assemble(grid, potential, (t1, t2));
            let sol = eigensolve(&op, bands)?;
            Ok(sol.eigenvalues)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandStructure {
        theta_grid: *theta_grid,
        bands,
        energies,
    })
}

// ───────────────────────────── flatness ──────────────────────────────────

/// Flatness threshold calibrated against the measured `V = 0` defect on the
/// same mesh, θ-grid and band count.
#[derive(Debug, Clone, Serialize)]
pub struct CalibratedThreshold {
    /// Largest dispersion any band shows at `V = 0` (pure numerical defect).
    pub baseline_defect: f64,
    /// Safety factor applied to the baseline.
    pub factor: f64,
    /// Absolute floor guarding against an exactly-zero baseline.
    pub floor: f64,
    /// The threshold actually used: `max(factor · baseline, floor)`.
    pub value: f64,
}

/// Run the `V = 0` calibration sweep and derive the flatness threshold.
pub fn calibrated_threshold(
    grid: &Grid,
    theta_grid: &ThetaGrid,
    bands: usize,
) -> Result<(CalibratedThreshold, BandStructure)> {
    let baseline = band_sweep(grid, &PotentialSpec::zero(&grid.lattice), theta_grid, bands)?;
    let defect = baseline.max_dispersion();
    let factor = 10.0;
    let floor = 1e-12 * (1.0 + baseline.max_abs_energy());
    let value = (factor * defect).max(floor);
    Ok((
        CalibratedThreshold {
            baseline_defect: defect,
            factor,
            floor,
            value,
        },
        baseline,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct BandFlatness {
    pub band: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub dispersion: f64,
    pub flat: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessReport {
    pub threshold: CalibratedThreshold,
    pub bands: Vec<BandFlatness>,
    pub max_dispersion: f64,
    pub all_flat: bool,
    pub any_dispersive: bool,
    /// Empirical max |ΔE|/|Δθ| over the sampled grid.
    pub lipschitz: f64,
}

/// Judge each band of a computed structure against a calibrated threshold.
pub fn flatness_test(
    structure: &BandStructure,
    grid: &Grid,
    threshold: &CalibratedThreshold,
) -> FlatnessReport {
    let bands: Vec<BandFlatness> = (0..structure.bands)
        .map(|b| {
            let e_min = structure.band_min(b);
            let e_max = structure.band_max(b);
            let dispersion = e_max - e_min;
            BandFlatness {
                band: b,
                e_min,
                e_max,
                dispersion,
                flat: dispersion <= threshold.value,
            }
        })
        .collect();
    let max_dispersion = structure.max_dispersion();
    let all_flat = bands.iter().all(|b| b.flat);
    let any_dispersive = bands.iter().any(|b| !b.flat);
    FlatnessReport {
        threshold: threshold.clone(),
        bands,
        max_dispersion,
        all_flat,
        any_dispersive,
        lipschitz: structure.empirical_lipschitz(grid),
    }
}

// ─────────────────────── degeneracy tracking ─────────────────────────────

#[derive(Debug, Clone, Serialize)]
pub struct LevelSnapshot {
    pub t: f64,
    /// Eigenvalues found inside the tracking window at this `t`.
    pub eigenvalues: Vec<f64>,
    /// Cluster sizes of those eigenvalues (splitting pattern).
    pub cluster_sizes: Vec<usize>,
    /// The window no longer holds the expected number of eigenvalues.
    pub tracking_lost: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackedLevel {
    pub base_mean: f64,
    pub base_multiplicity: usize,
    pub window: (f64, f64),
    pub snapshots: Vec<LevelSnapshot>,
    /// Per-branch dE/dt fitted on the smallest positive t values (ascending
    /// branch order). Empty when tracking was lost too early to fit.
    pub slopes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackerReport {
    pub t_values: Vec<f64>,
    pub theta: (f64, f64),
    pub levels: Vec<TrackedLevel>,
}

/// Follow the degenerate levels of `H(θ, V₀)` through `V₀ + t·U`.
///
/// Levels are the eigenvalue clusters at `t = 0`; each gets a spectral window
/// reaching halfway to its neighbours. A snapshot that finds the wrong number
/// of eigenvalues in the window is marked `tracking_lost` rather than being
/// silently reassigned. The topmost cluster is only tracked when it is
/// certainly complete, i.e. does not touch the last computed eigenvalue.
pub fn degeneracy_tracker(
    grid: &Grid,
    base_potential: &PotentialSpec,
    direction: &PotentialSpec,
    theta: (f64, f64),
    t_values: &[f64],
    bands: usize,
) -> Result<TrackerReport> {
    let mut ts: Vec<f64> = t_values.to_vec();
    ts.sort_by(|a, b| a.partial_cmp(b).expect("finite t values"));
    ts.dedup();
    if !ts.contains(&0.0) {
        return Err(Error::Validation(vec![
            "perturbation t_values must contain 0 (the unperturbed point)".into(),
        ]));
    }

    // Solve every t once.
    let mut spectra = Vec::with_capacity(ts.len());
    for &t in &ts {
        let v_t = PotentialSpec::linear_combination(base_potential, 1.0, direction, t)?;
        let op = assemble(grid, &v_t, theta);
        let sol = eigensolve(&op, bands)?;
        spectra.push(sol.eigenvalues);
    }
    let base_idx = ts.iter().position(|&t| t == 0.0).expect("checked above");
    let base = &spectra[base_idx];
    let clusters = cluster_eigenvalues(base, CLUSTER_TOL);

    // Window edges: halfway to the neighbouring cluster; the outermost edges
    // mirror the gap on the other side.
    let dim = grid.dim();
    let mut levels = Vec::new();
    for (ci, cluster) in clusters.iter().enumerate() {
        let lo_val = base[cluster.first];
        let hi_val = base[cluster.first + cluster.count - 1];
        let touches_top = cluster.first + cluster.count == bands && bands < dim;
        if touches_top {
            continue; // may extend past the computed spectrum
        }
        let gap_below = if ci > 0 {
            let prev = &clusters[ci - 1];
            lo_val - base[prev.first + prev.count - 1]
        } else if ci + 1 < clusters.len() {
            base[clusters[ci + 1].first] - hi_val
        } else {
            2.0 * 1.0f64.max(hi_val.abs())
        };
        let gap_above = if ci + 1 < clusters.len() {
            base[clusters[ci + 1].first] - hi_val
        } else {
            gap_below
        };
        let window = (lo_val - 0.5 * gap_below, hi_val + 0.5 * gap_above);

        let snapshots: Vec<LevelSnapshot> = ts
            .iter()
            .zip(spectra.iter())
            .map(|(&t, spectrum)| {
                let inside: Vec<f64> = spectrum
                    .iter()
                    .cloned()
                    .filter(|&v| v >= window.0 && v < window.1)
                    .collect();
                let sizes = cluster_eigenvalues(&inside, CLUSTER_TOL)
                    .iter()
                    .map(|c| c.count)
                    .collect();
                let tracking_lost = inside.len() != cluster.count;
                LevelSnapshot {
                    t,
                    eigenvalues: inside,
                    cluster_sizes: sizes,
                    tracking_lost,
                }
            })
            .collect();

        let slopes = fit_branch_slopes(&snapshots, cluster.count);
        levels.push(TrackedLevel {
            base_mean: cluster.mean,
            base_multiplicity: cluster.count,
            window,
            snapshots,
            slopes,
        });
    }
    Ok(TrackerReport {
        t_values: ts,
        theta,
        levels,
    })
}

/// Least-squares slopes per branch over `t = 0` plus the three smallest
/// positive `t` with intact tracking. Branches are matched by ascending order,
/// which is consistent on one side of `t = 0`; mixing signs would scramble
/// branches whenever slopes differ.
fn fit_branch_slopes(snapshots: &[LevelSnapshot], multiplicity: usize) -> Vec<f64> {
    let mut points: Vec<(f64, &[f64])> = snapshots
        .iter()
        .filter(|s| !s.tracking_lost && s.t >= 0.0)
        .map(|s| (s.t, s.eigenvalues.as_slice()))
        .collect();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite t"));
    points.truncate(4); // t = 0 and up to three smallest positive t
    if points.len() < 2 {
        return Vec::new();
    }
    let n = points.len() as f64;
    let t_mean: f64 = points.iter().map(|(t, _)| t).sum::<f64>() / n;
    let denom: f64 = points.iter().map(|(t, _)| (t - t_mean).powi(2)).sum();
    (0..multiplicity)
        .map(|r| {
            let y_mean: f64 = points.iter().map(|(_, e)| e[r]).sum::<f64>() / n;
            let num: f64 = points
                .iter()
                .map(|(t, e)| (t - t_mean) * (e[r] - y_mean))
                .sum();
            num / denom
        })
        .collect()
}

// ───────────────── first-order splitting, two routes ──────────────────────

/// Two independent routes to the splitting slopes of one degenerate level of
/// `H(θ, V₀)` under the family `V₀ + t·U`.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeComparison {
    /// Index of the tracked level, ascending in energy.
    pub level: usize,
    /// Mean eigenvalue of the level at `t = 0`.
    pub base_mean: f64,
    /// Number of eigenvalues in the level at `t = 0`.
    pub multiplicity: usize,
    /// Eigenvalues of the perturbation compressed to the level's eigenspace,
    /// `Φ† diag(U) Φ`, ascending: the slopes degenerate first-order theory
    /// predicts.
    pub predicted: Vec<f64>,
    /// Slopes fitted through the tracked eigenvalues near `t = 0`, ascending
    /// branch order.
    pub fitted: Vec<f64>,
    /// `max |predicted − fitted|` over branches; empty fits yield `NaN`.
    pub max_mismatch: f64,
}

/// Predict the first-order slopes of a tracked level and compare them with
/// the finite-difference slopes from [`degeneracy_tracker`].
///
/// The prediction diagonalizes the perturbation restricted to the `t = 0`
/// eigenspace; the fit only ever sees eigenvalues at `t > 0`. Agreement of
/// the two routes cross-validates the tracker, the eigenvectors, and the
/// assembly of the perturbed operators.
pub fn first_order_slopes(
    grid: &Grid,
    base_potential: &PotentialSpec,
    direction: &PotentialSpec,
    theta: (f64, f64),
    t_values: &[f64],
    bands: usize,
    level: usize,
) -> Result<(TrackerReport, SlopeComparison)> {
    let report = degeneracy_tracker(grid, base_potential, direction, theta, t_values, bands)?;
    if level >= report.levels.len() {
        return Err(Error::Validation(vec![format!(
            "level {level} is out of range: only {} levels were tracked",
            report.levels.len()
        )]));
    }
    let tracked = &report.levels[level];
    let first: usize = report.levels[..level]
        .iter()
        .map(|l| l.base_multiplicity)
        .sum();
    let m = tracked.base_multiplicity;

    // Re-solve the unperturbed fiber for its eigenvectors (the tracker only
    // keeps eigenvalues). The solver is deterministic, so the cluster layout
    // is the same; the guard below turns any drift into a hard error.
    let base = assemble(grid, base_potential, theta);
    let solution = eigensolve(&base, bands)?;
    let mean: f64 = solution.eigenvalues[first..first + m].iter().sum::<f64>() / m as f64;
    let scale = 1.0f64.max(tracked.base_mean.abs());
    if (mean - tracked.base_mean).abs() > 1e-6 * scale {
        return Err(Error::SolverFailure(format!(
            "base level drifted between solves: {mean:.12e} vs {:.12e}",
            tracked.base_mean
        )));
    }

    let u: Vec<f64> = {
        let mut vals = Vec::with_capacity(grid.dim());
        for s1 in 0..grid.n1 {
            for s2 in 0..grid.n2 {
                vals.push(direction.evaluate(grid.site_position(s1, s2)));
            }
        }
        vals
    };
    let mut compressed = ndarray::Array2::<Complex64>::zeros((m, m));
    for a in 0..m {
        let pa = solution.eigenvector(first + a);
        for b in a..m {
            let pb = solution.eigenvector(first + b);
            let mut acc = Complex64::ZERO;
            for s in 0..grid.dim() {
                acc += pa[s].conj() * u[s] * pb[s];
            }
            compressed[[a, b]] = acc;
            compressed[[b, a]] = acc.conj();
        }
    }
    let (predicted, _) = linalg::hermitian_eigendecomposition(&compressed)?;
    let predicted: Vec<f64> = predicted.to_vec();

    let fitted = tracked.slopes.clone();
    let max_mismatch = if fitted.len() == m {
        predicted
            .iter()
            .zip(&fitted)
            .map(|(p, f)| (p - f).abs())
            .fold(0.0f64, f64::max)
    } else {
        f64::NAN
    };
    let comparison = SlopeComparison {
        level,
        base_mean: tracked.base_mean,
        multiplicity: m,
        predicted,
        fitted,
        max_mismatch,
    };
    Ok((report, comparison))
}

// ───────────────────────────── genericity ────────────────────────────────

#[derive(Debug, Clone, Serialize)]
pub struct SeedVerdict {
    pub seed: u64,
    /// Dispersion of each checked band.
    pub dispersions: Vec<f64>,
    pub min_dispersion: f64,
    pub all_dispersive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericityReport {
    pub threshold: CalibratedThreshold,
    pub amplitude: f64,
    pub max_harmonic: i64,
    pub bands_checked: usize,
    /// The constant-potential control must report every band flat.
    pub control_all_flat: bool,
    pub control_max_dispersion: f64,
    pub seed_runs: Vec<SeedVerdict>,
    pub all_seeds_dispersive: bool,
}

/// Randomized dichotomy probe: every seeded potential of the given amplitude
/// should disperse all checked bands, while the constant control stays flat.
#[allow(clippy::too_many_arguments)]
pub fn genericity_experiment(
    grid: &Grid,
    theta_grid: &ThetaGrid,
    bands: usize,
    bands_checked: usize,
    seeds: &[u64],
    max_harmonic: i64,
    amplitude: f64,
) -> Result<GenericityReport> {
    if bands_checked > bands {
        return Err(Error::Validation(vec![format!(
            "cannot check {bands_checked} bands when only {bands} are computed"
        )]));
    }
    let (threshold, _) = calibrated_threshold(grid, theta_grid, bands)?;

    let control = band_sweep(
        grid,
        &PotentialSpec::constant(&grid.lattice, amplitude),
        theta_grid,
        bands,
    )?;
    let control_report = flatness_test(&control, grid, &threshold);

    let mut seed_runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let v = random_potential(&grid.lattice, seed, max_harmonic, amplitude)?;
        let bs = band_sweep(grid, &v, theta_grid, bands)?;
        let dispersions: Vec<f64> = (0..bands_checked).map(|b| bs.dispersion(b)).collect();
        let min_dispersion = dispersions.iter().cloned().fold(f64::INFINITY, f64::min);
        let all_dispersive = dispersions.iter().all(|&d| d > threshold.value);
        seed_runs.push(SeedVerdict {
            seed,
            dispersions,
            min_dispersion,
            all_dispersive,
        });
    }
    let all_seeds_dispersive = seed_runs.iter().all(|s| s.all_dispersive);
    Ok(GenericityReport {
        threshold,
        amplitude,
        max_harmonic,
        bands_checked,
        control_all_flat: control_report.all_flat,
        control_max_dispersion: control_report.max_dispersion,
        seed_runs,
        all_seeds_dispersive,
    })
}

// ───────────────────────────── flux sweep ────────────────────────────────

/// How mesh sizes follow the flux denominator across a sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum GridPolicy {
    /// `n1` scales with `q` so the resolution per unit cell stays fixed.
    PerUnitCell { n1: usize, n2: usize },
    /// Mesh sizes used verbatim for every fraction.
    Fixed { n1: usize, n2: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxPoint {
    pub p: i64,
    pub q: i64,
    /// Flux per unit cell in units of 2π: `p/q`.
    pub flux: f64,
    pub n1: usize,
    pub n2: usize,
    pub energies: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxSweepReport {
    pub theta: (f64, f64),
    pub bands: usize,
    pub points: Vec<FluxPoint>,
}

/// Solve one fiber per rational flux. Fractions are reduced first and
/// de-duplicated; a failure at one fraction is recorded at that point and
/// does not abort the others. Output is sorted by flux value.
pub fn flux_sweep(
    lattice: &Lattice,
    fractions: &[(i64, i64)],
    policy: GridPolicy,
    theta: (f64, f64),
    potential: &PotentialSpec,
    bands: usize,
) -> FluxSweepReport {
    let mut seen = std::collections::BTreeSet::new();
    let mut points = Vec::new();
    for &(p_raw, q_raw) in fractions {
        match make_flux(lattice, p_raw, q_raw) {
            Err(e) => points.push(FluxPoint {
                p: p_raw,
                q: q_raw,
                flux: if q_raw != 0 {
                    p_raw as f64 / q_raw as f64
                } else {
                    f64::NAN
                },
                n1: 0,
                n2: 0,
                energies: None,
                error: Some(e.to_string()),
            }),
            Ok(flux) => {
                if !seen.insert((flux.p, flux.q)) {
                    continue; // same reduced fraction already queued
                }
                let (n1, n2) = match policy {
                    GridPolicy::PerUnitCell { n1, n2 } => (n1 * flux.q as usize, n2),
                    GridPolicy::Fixed { n1, n2 } => (n1, n2),
                };
                let result = build_grid(lattice, &flux, n1, n2).and_then(|grid| {
                    let op = assemble(&grid, potential, theta);
                    eigensolve(&op, bands)
                });
                let (energies, error) = match result {
                    Ok(sol) => (Some(sol.eigenvalues), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                points.push(FluxPoint {
                    p: flux.p,
                    q: flux.q,
                    flux: flux.per_cell(),
                    n1,
                    n2,
                    energies,
                    error,
                });
            }
        }
    }
    // total_cmp keeps the order total when error points carry a NaN flux
    // (those sort last).
    points.sort_by(|a, b| a.flux.total_cmp(&b.flux));
    FluxSweepReport {
        theta,
        bands,
        points,
    }
}

// ───────────────────────────── nodal scan ────────────────────────────────

#[derive(Debug, Clone, Serialize)]
pub struct NodalComponent {
    pub size: usize,
    /// Extents of the component in mesh steps along each axis, measured by
    /// BFS displacement (winding across the torus accumulates).
    pub extent1: i64,
    pub extent2: i64,
    /// "point", "curve", or "region" by a size-versus-extent heuristic.
    pub classification: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodalReport {
    pub band: usize,
    pub zero_tol: f64,
    pub max_abs: f64,
    pub total_sites: usize,
    pub flagged_sites: usize,
    pub components: Vec<NodalComponent>,
    /// Flagged sites where the covariant gradient is also below tolerance
    /// relative to its own maximum — candidates for higher-order zeros.
    pub small_gradient_sites: usize,
    /// Distance from the scanned eigenvalue to its nearest computed neighbour.
    pub isolation_gap: f64,
}

/// Scan the near-zero set `{ |φ| < zero_tol · max|φ| }` of an eigenvector.
///
/// The scan demands a spectrally isolated level: for a degenerate eigenvalue
/// the eigenvector — hence its nodal set — is basis-dependent and the scan
/// would be meaningless. Isolation is certified against both neighbours,
/// which requires `band + 1` computed pairs unless the level tops the full
/// spectrum.
pub fn nodal_scan(
    solution: &EigenSolution,
    band: usize,
    grid: &Grid,
    zero_tol: f64,
) -> Result<NodalReport> {
    if band >= solution.len() {
        return Err(Error::BandCount {
            requested: band + 1,
            dim: solution.len(),
        });
    }
    if !(zero_tol > 0.0 && zero_tol < 1.0) {
        return Err(Error::Validation(vec![format!(
            "nodal zero_tol must lie in (0, 1), got {zero_tol}"
        )]));
    }
    let value = solution.eigenvalues[band];
    let scale = 1.0f64.max(value.abs());
    let gap_below = if band > 0 {
        value - solution.eigenvalues[band - 1]
    } else {
        f64::INFINITY
    };
    let gap_above = if band + 1 < solution.len() {
        solution.eigenvalues[band + 1] - value
    } else if band + 1 == solution.dim {
        f64::INFINITY
    } else {
        return Err(Error::BandCount {
            requested: band + 2,
            dim: solution.dim,
        });
    };
    let isolation_gap = gap_below.min(gap_above);
    if isolation_gap <= CLUSTER_TOL * scale {
        return Err(Error::DegenerateLevel {
            band,
            gap: isolation_gap,
        });
    }

    let phi = solution.eigenvector(band);
    let n = grid.dim();
    let max_abs = phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cut = zero_tol * max_abs;
    let flagged: Vec<bool> = phi.iter().map(|z| z.norm() < cut).collect();
    let flagged_sites = flagged.iter().filter(|&&f| f).count();

    // Connected components on the torus (4-neighbour), tracking unreduced
    // displacements so that extents see any winding.
    let mut visited = vec![false; n];
    let mut components = Vec::new();
    for s1 in 0..grid.n1 {
        for s2 in 0..grid.n2 {
            let root = grid.index(s1, s2);
            if !flagged[root] || visited[root] {
                continue;
            }
            let mut queue = std::collections::VecDeque::new();
            visited[root] = true;
            queue.push_back((s1 as i64, s2 as i64));
            let (mut min1, mut max1) = (s1 as i64, s1 as i64);
            let (mut min2, mut max2) = (s2 as i64, s2 as i64);
            let mut size = 0usize;
            while let Some((i1, i2)) = queue.pop_front() {
                size += 1;
                min1 = min1.min(i1);
                max1 = max1.max(i1);
                min2 = min2.min(i2);
                max2 = max2.max(i2);
                for (d1, d2) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                    let (j1, j2) = (i1 + d1, i2 + d2);
                    let (r1, r2, _) = grid.wrap(j1, j2);
                    let idx = grid.index(r1, r2);
                    if flagged[idx] && !visited[idx] {
                        visited[idx] = true;
                        queue.push_back((j1, j2));
                    }
                }
            }
            let extent1 = max1 - min1 + 1;
            let extent2 = max2 - min2 + 1;
            let longest = extent1.max(extent2);
            // Compact blob → point; thin and long → curve; thick → region.
            let classification = if longest <= 4 && size <= 12 {
                "point"
            } else if (size as i64) <= 3 * longest {
                "curve"
            } else {
                "region"
            };
            components.push(NodalComponent {
                size,
                extent1,
                extent2,
                classification: classification.to_string(),
            });
        }
    }
    components.sort_by_key(|c| std::cmp::Reverse(c.size));

    // Covariant central differences at flagged sites; a zero of the gradient
    // on top of a zero of φ suggests more than a simple vortex.
    let mut grad = vec![0.0f64; n];
    let mut max_grad: f64 = 0.0;
    for s1 in 0..grid.n1 {
        for s2 in 0..grid.n2 {
            let idx = grid.index(s1, s2);
            let fetch = |i1: i64, i2: i64| -> Complex64 {
                let (j, factor) = wrap_fetch(grid, i1, i2);
                factor * phi[j]
            };
            let d1 = 0.5 * (fetch(s1 as i64 + 1, s2 as i64) - fetch(s1 as i64 - 1, s2 as i64));
            let d2 = 0.5 * (fetch(s1 as i64, s2 as i64 + 1) - fetch(s1 as i64, s2 as i64 - 1));
            let g2 = grid.g11 * d1.norm_sqr()
                + grid.g22 * d2.norm_sqr()
                + 2.0 * grid.g12 * (d1 * d2.conj()).re;
            grad[idx] = g2.max(0.0).sqrt();
            max_grad = max_grad.max(grad[idx]);
        }
    }
    let small_gradient_sites = (0..n)
        .filter(|&i| flagged[i] && grad[i] < zero_tol * max_grad)
        .count();

    Ok(NodalReport {
        band,
        zero_tol,
        max_abs,
        total_sites: n,
        flagged_sites,
        components,
        small_gradient_sites,
        isolation_gap,
    })
}
