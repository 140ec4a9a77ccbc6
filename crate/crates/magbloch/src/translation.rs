//! Magnetic translations and their sign correction.
//!
//! An ordinary translation does not commute with the Landau Hamiltonian, but
//! the phase-dressed version
//!
//! ```text
//!     (U_α f)(x) = exp(i B/2 · x∧α) f(x + α)
//! ```
//!
//! does. Two of them commute only up to the flux through the parallelogram
//! they span: `U_α U_β = exp(iB α∧β) U_β U_α`. At rational flux `p/q` the
//! translations along the sublattice `Γ' = ℤ(qe₁) ⊕ ℤe₂` have integer flux
//! between any pair, so they commute up to a sign that a quadratic character
//! removes:
//!
//! ```text
//!     W_γ = Θ(γ) U_γ,     Θ(g₁u₁ + g₂u₂) = (-1)^(p g₁ g₂),
//! ```
//!
//! turning `γ ↦ W_γ` into a genuine representation: `W_γ W_γ' = W_{γ+γ'}`.
//! The fiber spaces are the simultaneous fixed points of all `W_γ`, which is
//! exactly the twisted boundary condition applied by `crate::fiber`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::lattice::{FluxRational, GammaPrime, Lattice, SublatticePrime};
use crate::vec2::Vec2;
use crate::Result;

/// The commutator phase `exp(iB α∧β)` of two magnetic translations.
pub fn commutation_phase(alpha: Vec2, beta: Vec2, b: f64) -> Complex64 {
    Complex64::from_polar(1.0, b * alpha.wedge(beta))
}

/// Sign character `Θ(γ) = (-1)^(p g₁ g₂)` on the sublattice.
///
/// It is the discrete square root fixing the failure of `γ ↦ U_γ` to be a
/// representation: `Θ(γ)Θ(γ') (-1)^(p(g₁g₂' - g₂g₁')) = Θ(γ+γ')`.
pub fn theta_phase(p: i64, g: GammaPrime) -> f64 {
    if (p * g.g1 * g.g2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Magnetic translation of a sampled function: `x ↦ exp(iB/2 x∧α) f(x+α)`.
pub fn magnetic_translate<'a>(
    f: impl Fn(Vec2) -> Complex64 + 'a,
    b: f64,
    alpha: Vec2,
) -> impl Fn(Vec2) -> Complex64 + 'a {
    move |x| Complex64::from_polar(1.0, 0.5 * b * x.wedge(alpha)) * f(x + alpha)
}

/// Sign-corrected sublattice translation `W_γ = Θ(γ) U_γ`.
pub fn weyl_translate<'a>(
    f: impl Fn(Vec2) -> Complex64 + 'a,
    flux: &FluxRational,
    sub: &SublatticePrime,
    g: GammaPrime,
) -> impl Fn(Vec2) -> Complex64 + 'a {
    let sign = theta_phase(flux.p, g);
    let translated = magnetic_translate(f, flux.b, sub.vector(g));
    move |x| sign * translated(x)
}

/// Summary of a randomized, pointwise verification of the translation algebra.
///
/// Every identity below is exact in exact arithmetic, so the defects measure
/// nothing but floating-point roundoff; `pass` requires them all to stay at
/// machine precision.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraReport {
    /// Flux numerator actually used.
    pub p: i64,
    /// Flux denominator actually used.
    pub q: i64,
    /// Random samples drawn per identity family.
    pub checks_per_family: usize,
    /// Worst defect of `U_α U_β = exp(iB α∧β) U_β U_α` over random `α, β, x`.
    pub max_commutation_defect: f64,
    /// Worst defect of `U_α U_β = exp(iB/2 α∧β) U_{α+β}` over random `α, β, x`.
    pub max_composition_defect: f64,
    /// Worst defect of the group law `W_γ W_γ' = W_{γ+γ'}` on the sublattice.
    pub max_group_law_defect: f64,
    /// Worst defect of `(U_{e₁})^q U_{e₂} = U_{e₂} (U_{e₁})^q`.
    pub max_cell_power_defect: f64,
    /// Defect threshold each family must stay under.
    pub tolerance: f64,
    /// Whether every family stayed under `tolerance`.
    pub pass: bool,
}

/// Acceptance bar for [`algebra_check`]: the identities are exact, so only
/// roundoff may remain.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Smooth, non-symmetric probe function with bounded magnitude, used to
/// evaluate operator identities pointwise.
fn probe_wave(x: Vec2) -> Complex64 {
    Complex64::from_polar(
        (-0.6 * x.dot(x)).exp(),
        1.1 * x.x - 0.7 * x.y + 0.3 * x.x * x.y,
    )
}

/// Randomized machine-precision verification of the magnetic translation
/// algebra at rational flux.
///
/// Four identity families are sampled `checks` times each with a seeded
/// generator:
///
/// 1. commutation: `U_α U_β = exp(iB α∧β) U_β U_α` for continuous `α, β`;
/// 2. composition: `U_α U_β = exp(iB/2 α∧β) U_{α+β}`;
/// 3. the sign-corrected group law `W_γ W_γ' = W_{γ+γ'}` on `Γ'`;
/// 4. commutation of `(U_{e₁})^q` with `U_{e₂}` (integer flux closes the
///    phase exactly).
pub fn algebra_check(
    lattice: &Lattice,
    flux: &FluxRational,
    seed: u64,
    checks: usize,
) -> Result<AlgebraReport> {
    let sub = SublatticePrime::new(lattice, flux)?;
    let b = flux.b;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |r: &mut ChaCha8Rng| Vec2::new(r.random_range(-1.5..1.5), r.random_range(-1.5..1.5));

    let mut max_commutation = 0.0f64;
    let mut max_composition = 0.0f64;
    for _ in 0..checks {
        let alpha = draw(&mut rng);
        let beta = draw(&mut rng);
        let x = draw(&mut rng);
        let ab = magnetic_translate(magnetic_translate(probe_wave, b, beta), b, alpha);
        let ba = magnetic_translate(magnetic_translate(probe_wave, b, alpha), b, beta);
        let commuted = commutation_phase(alpha, beta, b) * ba(x);
        max_commutation = max_commutation.max((ab(x) - commuted).norm());

        let joint = magnetic_translate(probe_wave, b, alpha + beta);
        let half_phase = Complex64::from_polar(1.0, 0.5 * b * alpha.wedge(beta));
        max_composition = max_composition.max((ab(x) - half_phase * joint(x)).norm());
    }

    let mut max_group_law = 0.0f64;
    for _ in 0..checks {
        let ga = GammaPrime::new(rng.random_range(-3..=3), rng.random_range(-3..=3));
        let gb = GammaPrime::new(rng.random_range(-3..=3), rng.random_range(-3..=3));
        let sum = GammaPrime::new(ga.g1 + gb.g1, ga.g2 + gb.g2);
        let x = draw(&mut rng);
        let lhs = weyl_translate(weyl_translate(probe_wave, flux, &sub, gb), flux, &sub, ga);
        let rhs = weyl_translate(probe_wave, flux, &sub, sum);
        max_group_law = max_group_law.max((lhs(x) - rhs(x)).norm());
    }

    let q_steps = flux.q.unsigned_abs() as usize;
    let mut ab: Box<dyn Fn(Vec2) -> Complex64> = Box::new(probe_wave);
    for _ in 0..q_steps {
        ab = Box::new(magnetic_translate(ab, b, lattice.e1()));
    }
    let ab = magnetic_translate(ab, b, lattice.e2());
    let mut ba: Box<dyn Fn(Vec2) -> Complex64> =
        Box::new(magnetic_translate(probe_wave, b, lattice.e2()));
    for _ in 0..q_steps {
        ba = Box::new(magnetic_translate(ba, b, lattice.e1()));
    }
    let mut max_cell_power = 0.0f64;
    for _ in 0..checks {
        let x = draw(&mut rng);
        max_cell_power = max_cell_power.max((ab(x) - ba(x)).norm());
    }

    let worst = max_commutation
        .max(max_composition)
        .max(max_group_law)
        .max(max_cell_power);
    Ok(AlgebraReport {
        p: flux.p,
        q: flux.q,
        checks_per_family: checks,
        max_commutation_defect: max_commutation,
        max_composition_defect: max_composition,
        max_group_law_defect: max_group_law,
        max_cell_power_defect: max_cell_power,
        tolerance: ALGEBRA_TOL,
        pass: worst <= ALGEBRA_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_flux, Lattice};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn gaussian(x: Vec2) -> Complex64 {
        Complex64::new((-x.dot(x)).exp(), 0.0)
    }

    /// A generic non-symmetric smooth test function.
    fn wavepacket(x: Vec2) -> Complex64 {
        Complex64::from_polar((-0.7 * x.dot(x)).exp(), 1.3 * x.x - 0.4 * x.y)
    }

    #[test]
    fn unit_flux_commutation_phase_on_cell_vectors() {
        // B e₁∧e₂ = 2π p/q turns into exp(2πi p/q) for the basis pair.
        let lat = Lattice::unit_square();
        let flux = make_flux(&lat, 1, 3).unwrap();
        let ph = commutation_phase(lat.e1(), lat.e2(), flux.b);
        let expected = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((ph - expected).norm() < 1e-14);
        // Against q e₁ the phase closes: exp(2πi p) = 1.
        let ph_q = commutation_phase(lat.e1() * 3.0, lat.e2(), flux.b);
        assert!((ph_q - Complex64::ONE).norm() < 1e-13);
    }

    #[test]
    fn magnetic_translate_matches_pointwise_formula() {
        // B = 2π, α = (1,0), x = (0,1): phase exp(iπ(x₁α₂ - x₂α₁)) = exp(-iπ) = -1,
        // so the value is -exp(-|（1,1)|²) = -e⁻².
        let b = 2.0 * PI;
        let g = magnetic_translate(gaussian, b, Vec2::new(1.0, 0.0));
        let got = g(Vec2::new(0.0, 1.0));
        let want = Complex64::new(-(-2.0f64).exp(), 0.0);
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn theta_phase_parity_table() {
        // Odd only when p, g₁, g₂ are all odd.
        assert_eq!(theta_phase(1, GammaPrime::new(1, 1)), -1.0);
        assert_eq!(theta_phase(1, GammaPrime::new(1, 0)), 1.0);
        assert_eq!(theta_phase(1, GammaPrime::new(0, 1)), 1.0);
        assert_eq!(theta_phase(2, GammaPrime::new(1, 1)), 1.0);
        assert_eq!(theta_phase(-1, GammaPrime::new(1, 1)), -1.0);
        assert_eq!(theta_phase(3, GammaPrime::new(-1, 1)), -1.0);
    }

    #[test]
    fn composition_law_of_magnetic_translations() {
        // U_α U_β = exp(iB/2 α∧β) U_{α+β}, checked pointwise on sample points.
        let b = 1.7;
        let alpha = Vec2::new(0.6, -0.3);
        let beta = Vec2::new(-0.2, 0.9);
        let lhs = magnetic_translate(magnetic_translate(wavepacket, b, beta), b, alpha);
        let rhs_fn = magnetic_translate(wavepacket, b, alpha + beta);
        let scale = Complex64::from_polar(1.0, 0.5 * b * alpha.wedge(beta));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..64 {
            let x = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let diff = (lhs(x) - scale * rhs_fn(x)).norm();
            assert!(diff < 1e-13, "composition defect {diff:.2e} at {x:?}");
        }
    }

    #[test]
    fn qth_power_of_cell_step_commutes_with_transverse_step() {
        // (U_{e₁})^q equals U_{qe₁} (collinear steps compose without phase), and
        // at rational flux it commutes exactly with U_{e₂}.
        let lat = Lattice::unit_square();
        let flux = make_flux(&lat, 2, 3).unwrap();
        let q = flux.q as usize;

        let mut pow: Box<dyn Fn(Vec2) -> Complex64> = Box::new(wavepacket);
        for _ in 0..q {
            pow = Box::new(magnetic_translate(pow, flux.b, lat.e1()));
        }
        let ab = magnetic_translate(pow, flux.b, lat.e2());

        let u2_first = magnetic_translate(wavepacket, flux.b, lat.e2());
        let mut ba: Box<dyn Fn(Vec2) -> Complex64> = Box::new(u2_first);
        for _ in 0..q {
            ba = Box::new(magnetic_translate(ba, flux.b, lat.e1()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..64 {
            let x = Vec2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            assert!((ab(x) - ba(x)).norm() < 1e-12);
        }
    }

    #[test]
    fn weyl_group_law_holds_on_sublattice() {
        // W_γ W_γ' = W_{γ+γ'} pointwise, including odd-odd sign cases.
        let lat = Lattice::unit_square();
        for &(p, q) in &[(1i64, 1i64), (1, 2), (2, 3), (-3, 2)] {
            let flux = make_flux(&lat, p, q).unwrap();
            let sub = SublatticePrime::new(&lat, &flux).unwrap();
            let cases = [
                (GammaPrime::new(1, 0), GammaPrime::new(0, 1)),
                (GammaPrime::new(1, 1), GammaPrime::new(1, -1)),
                (GammaPrime::new(-1, 1), GammaPrime::new(2, 1)),
            ];
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (p as u64) ^ (q as u64) << 8);
            for (ga, gb) in cases {
                let sum = GammaPrime::new(ga.g1 + gb.g1, ga.g2 + gb.g2);
                let inner = weyl_translate(wavepacket, &flux, &sub, gb);
                let lhs = weyl_translate(inner, &flux, &sub, ga);
                let rhs = weyl_translate(wavepacket, &flux, &sub, sum);
                for _ in 0..16 {
                    let x = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    let defect = (lhs(x) - rhs(x)).norm();
                    assert!(
                        defect < 1e-12,
                        "group law defect {defect:.2e} for p/q={p}/{q}, γ={ga:?}, γ'={gb:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn algebra_check_passes_at_machine_precision() {
        // A skewed lattice exercises the signed wedge; several fluxes cover
        // sign and parity branches of the character.
        let lat = Lattice::new(Vec2::new(1.0, 0.1), Vec2::new(0.3, 1.1)).unwrap();
        for &(p, q) in &[(1i64, 1i64), (2, 3), (-3, 2)] {
            let flux = make_flux(&lat, p, q).unwrap();
            let report = algebra_check(&lat, &flux, 42, 40).unwrap();
            assert_eq!(report.checks_per_family, 40);
            assert!(
                report.pass,
                "algebra defects exceeded {:.1e} for p/q={p}/{q}: {report:?}",
                report.tolerance
            );
        }
    }

    #[test]
    fn algebra_check_is_deterministic_for_a_fixed_seed() {
        let lat = Lattice::unit_square();
        let flux = make_flux(&lat, 1, 2).unwrap();
        let a = algebra_check(&lat, &flux, 7, 25).unwrap();
        let b = algebra_check(&lat, &flux, 7, 25).unwrap();
        assert_eq!(a.max_commutation_defect, b.max_commutation_defect);
        assert_eq!(a.max_group_law_defect, b.max_group_law_defect);
        assert_eq!(a.max_cell_power_defect, b.max_cell_power_defect);
    }

    proptest! {
        #[test]
        fn commutation_phase_is_antisymmetric_under_swap(
            ax in -3.0..3.0f64, ay in -3.0..3.0f64,
            bx in -3.0..3.0f64, by in -3.0..3.0f64,
            b in -5.0..5.0f64,
        ) {
            let alpha = Vec2::new(ax, ay);
            let beta = Vec2::new(bx, by);
            let fwd = commutation_phase(alpha, beta, b);
            let bwd = commutation_phase(beta, alpha, b);
            // Swapping the pair conjugates the phase, and the product is 1.
            prop_assert!((fwd * bwd - Complex64::ONE).norm() < 1e-12);
            prop_assert!((fwd - bwd.conj()).norm() < 1e-12);
        }

        #[test]
        fn theta_phase_is_a_quadratic_character(
            p in -9i64..9,
            g1 in -6i64..6, g2 in -6i64..6,
            h1 in -6i64..6, h2 in -6i64..6,
        ) {
            // Θ(γ)Θ(γ')·(-1)^(p(g₁h₂ - g₂h₁)) = Θ(γ+γ'): the sign absorbs the
            // integer-flux commutator exactly.
            let tg = theta_phase(p, GammaPrime::new(g1, g2));
            let th = theta_phase(p, GammaPrime::new(h1, h2));
            let cross = if (p * (g1 * h2 - g2 * h1)) % 2 == 0 { 1.0 } else { -1.0 };
            let tsum = theta_phase(p, GammaPrime::new(g1 + h1, g2 + h2));
            prop_assert_eq!(tg * th * cross, tsum);
        }
    }
}
