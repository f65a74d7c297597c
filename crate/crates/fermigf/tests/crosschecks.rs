//! Cross-module consistency: quantities that the library computes by
//! two or more independent routes must agree, over both the shipped
//! presets and randomized inputs.

use proptest::prelude::*;

use fermigf::curve::{
    enclosed_area, fermi_branches, reconstruct_wavefunction, DerivativeScheme,
    ReconstructionAnchor,
};
use fermigf::dynamics::{
    analytic_ellipse, analytic_moments, analytic_state, InitialState, SystemSpec,
};
use fermigf::ellipse::{ellipse_area, ellipse_from_moments, fit_ellipse, EllipseCoeffs};
use fermigf::grid::Grid;
use fermigf::measure::{compton_solve, estimate_moments, ComptonConfig, PrismConstants};
use fermigf::polar::{polar_decompose, DEFAULT_RHO_FLOOR_FRACTION};
use fermigf::propagate::{propagate, PropagationPlan};
use fermigf::scenario::{
    free_spreading_preset, harmonic_squeezed_preset, uniform_force_preset, Scenario,
};
use fermigf::state::{
    gaussian_packet, moments, superpose, GaussianParams, PhysicalConstants,
};

fn presets() -> [Scenario; 3] {
    [free_spreading_preset(), uniform_force_preset(), harmonic_squeezed_preset()]
}

fn extract_fit(scenario: &Scenario, time: f64) -> EllipseCoeffs {
    let psi = scenario.state_at(time).unwrap();
    let curve =
        fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION).unwrap();
    fit_ellipse(&curve).unwrap().coeffs
}

fn max_rel_diff(x: &EllipseCoeffs, y: &EllipseCoeffs) -> f64 {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    rel(x.a, y.a)
        .max(rel(x.b, y.b))
        .max(rel(x.c, y.c))
        .max(rel(x.center_q, y.center_q))
        .max(rel(x.center_p, y.center_p))
}

/// The conic is obtained three ways: fitted to the extracted curve,
/// evaluated from the closed-form dynamics, and mapped from grid-
/// integrated moments. All three must coincide.
#[test]
fn ellipse_coefficients_agree_across_three_routes() {
    for scenario in presets() {
        let constants = scenario.constants().unwrap();
        let initial = scenario.initial_state().unwrap().unwrap();
        let system = scenario.system_spec();
        let time = scenario.absolute_times().unwrap()[1];
        let fitted = extract_fit(&scenario, time);
        let closed = analytic_ellipse(&system, &initial, time, constants).unwrap();
        let from_moments =
            ellipse_from_moments(&moments(&scenario.state_at(time).unwrap()), constants.hbar)
                .unwrap();
        assert!(
            max_rel_diff(&fitted, &closed) < 1e-5,
            "fit vs closed form disagree for {:?}",
            scenario.name
        );
        assert!(
            max_rel_diff(&from_moments, &closed) < 1e-5,
            "moment route vs closed form disagree for {:?}",
            scenario.name
        );
    }
}

/// The enclosed area is computed by quadrature between the branches and
/// from the fitted conic's coefficients; the routes must agree.
#[test]
fn enclosed_area_agrees_with_the_conic_area() {
    for scenario in presets() {
        for &time in &scenario.absolute_times().unwrap() {
            let psi = scenario.state_at(time).unwrap();
            let curve =
                fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)
                    .unwrap();
            let quadrature = enclosed_area(&curve).unwrap();
            let conic = ellipse_area(&fit_ellipse(&curve).unwrap().coeffs).unwrap();
            assert!(
                (quadrature - conic).abs() / conic < 1e-8,
                "{:?} at t = {time}: quadrature {quadrature} vs conic {conic}",
                scenario.name
            );
        }
    }
}

/// Closed-form moments of every preset match grid integration at all
/// observation times.
#[test]
fn closed_form_moments_match_grid_integrals() {
    for scenario in presets() {
        let constants = scenario.constants().unwrap();
        let initial = scenario.initial_state().unwrap().unwrap();
        let system = scenario.system_spec();
        for &time in &scenario.absolute_times().unwrap() {
            let closed = analytic_moments(&system, &initial, time, constants).unwrap();
            let grid = moments(&scenario.state_at(time).unwrap());
            for (a, b) in [
                (closed.mean_q, grid.mean_q),
                (closed.mean_p, grid.mean_p),
                (closed.var_q, grid.var_q),
                (closed.var_p, grid.var_p),
                (closed.correlation_k, grid.correlation_k),
            ] {
                assert!(
                    (a - b).abs() < 1e-9,
                    "{:?} at t = {time}: closed {a} vs grid {b}",
                    scenario.name
                );
            }
        }
    }
}

/// An off-preset packet driven by the split-step integrator lands on
/// the closed-form state.
#[test]
fn split_step_matches_the_closed_form_off_preset() {
    let grid = Grid::new(-30.0, 30.0, 1024).unwrap();
    let constants = PhysicalConstants::default();
    let system = SystemSpec::UniformForce { force: -0.8 };
    let initial =
        InitialState::Gaussian(GaussianParams::new(-1.0, 0.7, 1.3).unwrap());
    let t = 0.8;
    let start = analytic_state(&grid, constants, &system, &initial, 0.0).unwrap();
    let plan = PropagationPlan::new(system, 1e-3, 800).unwrap();
    let evolved = propagate(&start, &plan).unwrap();
    let exact = analytic_state(&grid, constants, &system, &initial, t).unwrap();
    let distance = exact.l2_distance_up_to_phase(&evolved).unwrap();
    assert!(distance < 1e-6, "L2 distance {distance}");
}

/// Estimates drawn with the documented seed stream stay within five
/// standard errors of the truth — a sanity band wide enough to be
/// seed-robust, checked over several seeds.
#[test]
fn sampled_moments_stay_within_five_standard_errors()
{
    let scenario = free_spreading_preset();
    let constants = scenario.constants().unwrap();
    let truth = analytic_moments(
        &scenario.system_spec(),
        &scenario.initial_state().unwrap().unwrap(),
        constants.mass / constants.hbar, // tau = 1 for the unit-width packet
        constants,
    )
    .unwrap();
    let prism = PrismConstants { c_lin: 0.5, d_quad: 0.5 };
    for seed in [1, 2, 3, 4, 5] {
        let record = estimate_moments(&truth, &prism, 100_000, seed).unwrap();
        let est = record.estimate;
        let se = record.std_errors;
        for (value, target, error) in [
            (est.mean_q, truth.mean_q, se.mean_q),
            (est.mean_p, truth.mean_p, se.mean_p),
            (est.var_q, truth.var_q, se.var_q),
            (est.var_p, truth.var_p, se.var_p),
            (est.correlation_k, truth.correlation_k, se.correlation_k),
        ] {
            assert!(
                (value - target).abs() < 5.0 * error,
                "seed {seed}: {value} vs {target} (se {error})"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Free-packet conics always enclose pi*hbar, for any width, center,
    /// momentum, and time.
    #[test]
    fn free_packet_conic_area_is_invariant(
        delta in 0.5f64..2.2,
        q0 in -3.0f64..3.0,
        p0 in -3.0f64..3.0,
        tau in -2.5f64..2.5,
    ) {
        let constants = PhysicalConstants::default();
        let initial = InitialState::Gaussian(GaussianParams::new(q0, p0, delta).unwrap());
        let t = tau * constants.mass * delta * delta / constants.hbar;
        let coeffs = analytic_ellipse(&SystemSpec::Free, &initial, t, constants).unwrap();
        let area = ellipse_area(&coeffs).unwrap();
        prop_assert!((area / (std::f64::consts::PI * constants.hbar) - 1.0).abs() < 1e-9);
    }

    /// The closed-form coefficient determinant is pinned to 1/hbar^2 for
    /// the oscillator family at any squeeze, amplitude, and phase.
    #[test]
    fn harmonic_conic_determinant_is_pinned(
        inverse_width in 0.4f64..1.8,
        amplitude in 0.0f64..3.0,
        phase in 0.0f64..std::f64::consts::TAU,
    ) {
        let constants = PhysicalConstants::default();
        let omega0 = 1.0;
        let initial = InitialState::HarmonicGaussian(
            fermigf::dynamics::HarmonicGaussianParams::new(inverse_width, amplitude, 0.0).unwrap(),
        );
        let coeffs =
            analytic_ellipse(&SystemSpec::Harmonic { omega0 }, &initial, phase / omega0, constants)
                .unwrap();
        prop_assert!((coeffs.determinant() - 1.0).abs() < 1e-9);
    }

    /// Polar decomposition reproduces the state on every valid node.
    #[test]
    fn polar_decomposition_round_trips(
        q0 in -2.0f64..2.0,
        p0 in -2.0f64..2.0,
        delta in 0.6f64..1.8,
    ) {
        let grid = Grid::new(-24.0, 24.0, 512).unwrap();
        let constants = PhysicalConstants::default();
        let psi =
            gaussian_packet(&grid, constants, &GaussianParams::new(q0, p0, delta).unwrap())
                .unwrap();
        let fields = polar_decompose(&psi, DEFAULT_RHO_FLOOR_FRACTION).unwrap();
        for (j, amp) in psi.amplitudes().iter().enumerate() {
            if fields.valid[j] {
                let rebuilt = fields.rho[j]
                    * num_complex::Complex64::new(0.0, fields.theta[j]).exp();
                prop_assert!((rebuilt - amp).norm() < 1e-10);
            }
        }
    }

    /// Superposing two displaced packets always lands on unit norm.
    #[test]
    fn superpositions_are_normalized(
        w1_re in -2.0f64..2.0,
        w1_im in -2.0f64..2.0,
        w2_re in 0.2f64..2.0,
    ) {
        prop_assume!(w1_re.abs() + w1_im.abs() > 0.05);
        let grid = Grid::new(-26.0, 26.0, 512).unwrap();
        let constants = PhysicalConstants::default();
        let a = gaussian_packet(&grid, constants, &GaussianParams::new(-2.0, 0.0, 1.0).unwrap())
            .unwrap();
        let b = gaussian_packet(&grid, constants, &GaussianParams::new(2.0, 0.0, 1.0).unwrap())
            .unwrap();
        let combined = superpose(
            &a,
            &b,
            num_complex::Complex64::new(w1_re, w1_im),
            num_complex::Complex64::new(w2_re, 0.0),
        )
        .unwrap();
        prop_assert!((combined.norm() - 1.0).abs() < 1e-12);
    }

    /// In the forward-recoil regime (recoil angle well below a right
    /// angle, small incoming speed) a root always exists and satisfies
    /// all three conservation equations.
    #[test]
    fn scattering_roots_satisfy_conservation(
        beta0 in -0.005f64..0.045,
        phi in 0.15f64..1.0,
    ) {
        let config = ComptonConfig::new(0.05, phi, 1.0, 1.0, 1.0).unwrap();
        let solution = compton_solve(&config, beta0).unwrap();
        prop_assert!(solution.nu > 0.0);
        for r in solution.residuals {
            prop_assert!(r.abs() < 1e-10, "residual {r}");
        }
    }

    /// Over the full supported range the solver either returns a root
    /// meeting the conservation equations or reports that none exists
    /// (the window closes as the recoil angle approaches a right
    /// angle); it never fabricates a solution.
    #[test]
    fn scattering_never_fabricates_roots(
        beta0 in -0.045f64..0.045,
        phi in 0.15f64..2.9,
    ) {
        let config = ComptonConfig::new(0.05, phi, 1.0, 1.0, 1.0).unwrap();
        match compton_solve(&config, beta0) {
            Ok(solution) => {
                prop_assert!(solution.nu > 0.0);
                for r in solution.residuals {
                    prop_assert!(r.abs() < 1e-10, "residual {r}");
                }
            }
            Err(fermigf::error::Error::NoRoot(_)) => {} // kinematic boundary
            Err(other) => prop_assert!(false, "unexpected error: {other}"),
        }
    }
}

/// A particle at rest cannot recoil at or beyond a right angle.
#[test]
fn backward_recoil_of_a_resting_particle_has_no_root() {
    for phi in [1.7, 2.2, 3.0] {
        let config = ComptonConfig::new(0.05, phi, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            compton_solve(&config, 0.0),
            Err(fermigf::error::Error::NoRoot(_))
        ));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Randomized packets survive the curve -> state round trip.
    #[test]
    fn reconstruction_round_trips_random_packets(
        q0 in -2.0f64..2.0,
        p0 in -1.5f64..1.5,
        delta in 0.75f64..1.5,
    ) {
        let grid = Grid::new(-30.0, 30.0, 1024).unwrap();
        let constants = PhysicalConstants::default();
        let psi =
            gaussian_packet(&grid, constants, &GaussianParams::new(q0, p0, delta).unwrap())
                .unwrap();
        let curve =
            fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)
                .unwrap();
        let rebuilt =
            reconstruct_wavefunction(&curve, &ReconstructionAnchor::at_density_peak(&psi))
                .unwrap();
        let distance = psi.l2_distance_up_to_phase(&rebuilt).unwrap();
        prop_assert!(distance < 1e-4, "round-trip distance {distance}");
    }
}
