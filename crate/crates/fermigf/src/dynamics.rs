//! Closed-form time evolution of Gaussian states for the three model
//! systems (free motion, uniform force, harmonic oscillator), together
//! with the analytic ellipse coefficients, moving centers, and moments
//! that the numerical extraction is checked against.

use num_complex::Complex64;

use crate::ellipse::EllipseCoeffs;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::{GaussianParams, Moments, PhysicalConstants, WaveFunction};

/// The potential the packet moves in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemSpec {
    /// `V = 0`.
    Free,
    /// `V = -force * q`, a constant accelerating force.
    UniformForce { force: f64 },
    /// `V = m omega0^2 q^2 / 2`.
    Harmonic { omega0: f64 },
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SystemSpec::Free => Ok(()),
            SystemSpec::UniformForce { force } if force.is_finite() => Ok(()),
            SystemSpec::UniformForce { force } => Err(Error::InvalidParameter(format!(
                "force must be finite, got {force}"
            ))),
            SystemSpec::Harmonic { omega0 } if omega0 > 0.0 && omega0.is_finite() => Ok(()),
            SystemSpec::Harmonic { omega0 } => Err(Error::InvalidParameter(format!(
                "omega0 must be positive, got {omega0}"
            ))),
        }
    }
}

/// Parameters of the Gaussian harmonic-oscillator solution
/// `N(t) exp{-A(t)(q - Q(t))^2/2 + i chi(q, t)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicGaussianParams {
    /// Width scale of the packet (`1/length`); the squeeze parameter is
    /// `hbar^2 inverse_width^4 / (m omega0)^2`.
    pub inverse_width: f64,
    /// Amplitude of the center oscillation `Q(t)`.
    pub center_amplitude: f64,
    /// Phase offset of the oscillation.
    pub phase_offset: f64,
}

impl HarmonicGaussianParams {
    pub fn new(inverse_width: f64, center_amplitude: f64, phase_offset: f64) -> Result<Self> {
        if !(inverse_width > 0.0 && inverse_width.is_finite())
            || !center_amplitude.is_finite()
            || !phase_offset.is_finite()
        {
            return Err(Error::InvalidParameter(format!(
                "harmonic Gaussian needs finite parameters with inverse_width > 0, \
                 got ({inverse_width}, {center_amplitude}, {phase_offset})"
            )));
        }
        Ok(Self { inverse_width, center_amplitude, phase_offset })
    }

    /// Squeeze parameter; 1 for coherent states, < 1 for position squeezing
    /// at phase zero.
    pub fn squeeze_parameter(&self, omega0: f64, constants: PhysicalConstants) -> f64 {
        let a2 = self.inverse_width * self.inverse_width;
        (constants.hbar * a2 / (constants.mass * omega0)).powi(2)
    }
}

/// Initial condition matching the system kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// Minimum-uncertainty packet (free or uniform-force systems).
    Gaussian(GaussianParams),
    /// Oscillator Gaussian mode (harmonic system).
    HarmonicGaussian(HarmonicGaussianParams),
}

/// Dimensionless spreading parameter `hbar t / (m delta^2)`.
pub fn spreading_parameter(t: f64, delta: f64, constants: PhysicalConstants) -> f64 {
    constants.hbar * t / (constants.mass * delta * delta)
}

fn require_support(grid: &Grid, center: f64, half_width: f64) -> Result<()> {
    if center - half_width <= grid.q_min() || center + half_width >= grid.q_max() {
        return Err(Error::PacketOutOfBox(format!(
            "support [{:.3}, {:.3}] exceeds box [{:.3}, {:.3}]",
            center - half_width,
            center + half_width,
            grid.q_min(),
            grid.q_max()
        )));
    }
    Ok(())
}

/// Exact free evolution of a minimum-uncertainty packet.
pub fn evolve_free(
    grid: &Grid,
    constants: PhysicalConstants,
    params: &GaussianParams,
    t: f64,
) -> Result<WaveFunction> {
    free_like(grid, constants, params, t, 0.0)
}

/// Exact evolution under the constant force; reduces to [`evolve_free`]
/// at zero force.
pub fn evolve_uniform_force(
    grid: &Grid,
    constants: PhysicalConstants,
    params: &GaussianParams,
    force: f64,
    t: f64,
) -> Result<WaveFunction> {
    if !force.is_finite() {
        return Err(Error::InvalidParameter(format!("force must be finite, got {force}")));
    }
    free_like(grid, constants, params, t, force)
}

fn free_like(
    grid: &Grid,
    constants: PhysicalConstants,
    params: &GaussianParams,
    t: f64,
    force: f64,
) -> Result<WaveFunction> {
    constants.validate()?;
    params.validate()?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let (hbar, m) = (constants.hbar, constants.mass);
    let (q0, p0, delta) = (params.q0, params.p0, params.delta);
    let tau = spreading_parameter(t, delta, constants);
    let center = q0 + p0 * t / m + force * t * t / (2.0 * m);
    require_support(grid, center, 8.0 * delta * (1.0 + tau * tau).sqrt())?;

    let spread = Complex64::new(1.0, tau);
    let prefactor = (Complex64::new(std::f64::consts::PI.sqrt() * delta, 0.0) * spread)
        .sqrt()
        .inv();
    let kinetic_phase = -p0 * p0 * t / (2.0 * m);
    let force_phase_const = -force * p0 * t * t / (2.0 * m) - force * force * t.powi(3) / (6.0 * m);
    let amps: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&q| {
            let shifted = q - center;
            let envelope =
                -Complex64::new(shifted * shifted / (2.0 * delta * delta), 0.0) / spread;
            let phase = (p0 * (q - q0) + kinetic_phase + force * q * t + force_phase_const) / hbar;
            prefactor * (envelope + Complex64::new(0.0, phase)).exp()
        })
        .collect();
    WaveFunction::from_amplitudes(*grid, constants, amps)
}

/// Pieces of the oscillator solution shared by the state, ellipse, and
/// moment formulas.
struct HarmonicFrame {
    cos: f64,
    sin: f64,
    squeeze: f64,
    width_re: f64,
    width_im: f64,
    center: f64,
}

fn harmonic_frame(
    params: &HarmonicGaussianParams,
    omega0: f64,
    t: f64,
    constants: PhysicalConstants,
) -> HarmonicFrame {
    let (hbar, m) = (constants.hbar, constants.mass);
    let angle = omega0 * t + params.phase_offset;
    let (sin, cos) = angle.sin_cos();
    let squeeze = params.squeeze_parameter(omega0, constants);
    let denom = hbar * (cos * cos + squeeze * sin * sin);
    HarmonicFrame {
        cos,
        sin,
        squeeze,
        width_re: m * omega0 * squeeze.sqrt() / denom,
        width_im: m * omega0 * (1.0 - squeeze) * cos * sin / denom,
        center: params.center_amplitude * cos,
    }
}

/// Exact oscillator Gaussian at time `t`.
///
/// The normalization picks the square-root branch that is continuous in
/// `t` starting from phase zero, so states half a period apart differ by
/// the expected factor `-i` rather than jumping branches.
pub fn harmonic_state(
    grid: &Grid,
    constants: PhysicalConstants,
    omega0: f64,
    params: &HarmonicGaussianParams,
    t: f64,
) -> Result<WaveFunction> {
    constants.validate()?;
    SystemSpec::Harmonic { omega0 }.validate()?;
    HarmonicGaussianParams::new(
        params.inverse_width,
        params.center_amplitude,
        params.phase_offset,
    )?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let (hbar, m) = (constants.hbar, constants.mass);
    let frame = harmonic_frame(params, omega0, t, constants);
    let squeeze = frame.squeeze;

    // widest spread over the cycle bounds the support for every phase
    let widest_var = hbar * squeeze.max(1.0) / (2.0 * m * omega0 * squeeze.sqrt());
    require_support(
        grid,
        0.0,
        params.center_amplitude.abs() + 8.0 * widest_var.sqrt(),
    )?;

    // continuous angle of cos(angle) + i sqrt(squeeze) sin(angle)
    let angle = omega0 * t + params.phase_offset;
    let half_turns = (angle / std::f64::consts::PI).round();
    let reduced = angle - half_turns * std::f64::consts::PI;
    let branch_angle = half_turns * std::f64::consts::PI
        + (squeeze.sqrt() * reduced.sin()).atan2(reduced.cos());
    let modulus = (frame.cos * frame.cos + squeeze * frame.sin * frame.sin).sqrt();
    let norm = (params.inverse_width / std::f64::consts::PI.sqrt()).sqrt() / modulus.sqrt();
    let prefactor = Complex64::from_polar(norm, -branch_angle / 2.0);

    let chi_linear = -omega0 * m * params.center_amplitude * frame.sin / hbar;
    let chi_const = m * omega0 * params.center_amplitude * params.center_amplitude * frame.cos
        * frame.sin
        / (2.0 * hbar);
    let width = Complex64::new(frame.width_re, frame.width_im);
    let amps: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&q| {
            let shifted = q - frame.center;
            let exponent = -width * shifted * shifted / 2.0
                + Complex64::new(0.0, chi_linear * q + chi_const);
            prefactor * exponent.exp()
        })
        .collect();
    WaveFunction::from_amplitudes(*grid, constants, amps)
}

/// Closed-form state for any system/initial-condition pair.
pub fn analytic_state(
    grid: &Grid,
    constants: PhysicalConstants,
    system: &SystemSpec,
    initial: &InitialState,
    t: f64,
) -> Result<WaveFunction> {
    match (system, initial) {
        (SystemSpec::Free, InitialState::Gaussian(params)) => {
            evolve_free(grid, constants, params, t)
        }
        (SystemSpec::UniformForce { force }, InitialState::Gaussian(params)) => {
            evolve_uniform_force(grid, constants, params, *force, t)
        }
        (SystemSpec::Harmonic { omega0 }, InitialState::HarmonicGaussian(params)) => {
            harmonic_state(grid, constants, *omega0, params, t)
        }
        _ => Err(Error::InvalidParameter(
            "initial state kind does not match the system kind".into(),
        )),
    }
}

/// Closed-form curve ellipse (coefficients and moving center) at time `t`.
pub fn analytic_ellipse(
    system: &SystemSpec,
    initial: &InitialState,
    t: f64,
    constants: PhysicalConstants,
) -> Result<EllipseCoeffs> {
    constants.validate()?;
    system.validate()?;
    let (hbar, m) = (constants.hbar, constants.mass);
    match (system, initial) {
        (SystemSpec::Free, InitialState::Gaussian(g))
        | (SystemSpec::UniformForce { .. }, InitialState::Gaussian(g)) => {
            g.validate()?;
            let tau = spreading_parameter(t, g.delta, constants);
            let d2 = g.delta * g.delta;
            let force = match system {
                SystemSpec::UniformForce { force } => *force,
                _ => 0.0,
            };
            Ok(EllipseCoeffs {
                a: 1.0 / d2,
                b: d2 * (1.0 + tau * tau) / (hbar * hbar),
                c: -t / (m * d2),
                center_q: g.q0 + g.p0 * t / m + force * t * t / (2.0 * m),
                center_p: g.p0 + force * t,
            })
        }
        (SystemSpec::Harmonic { omega0 }, InitialState::HarmonicGaussian(h)) => {
            let frame = harmonic_frame(h, *omega0, t, constants);
            let (ar, ai) = (frame.width_re, frame.width_im);
            Ok(EllipseCoeffs {
                a: (ar * ar + ai * ai) / ar,
                b: 1.0 / (hbar * hbar * ar),
                c: ai / (hbar * ar),
                center_q: frame.center,
                center_p: -m * omega0 * h.center_amplitude * frame.sin,
            })
        }
        _ => Err(Error::InvalidParameter(
            "initial state kind does not match the system kind".into(),
        )),
    }
}

/// Closed-form moments (means, variances, correlation) at time `t`.
pub fn analytic_moments(
    system: &SystemSpec,
    initial: &InitialState,
    t: f64,
    constants: PhysicalConstants,
) -> Result<Moments> {
    constants.validate()?;
    system.validate()?;
    let (hbar, m) = (constants.hbar, constants.mass);
    match (system, initial) {
        (SystemSpec::Free, InitialState::Gaussian(g))
        | (SystemSpec::UniformForce { .. }, InitialState::Gaussian(g)) => {
            g.validate()?;
            let tau = spreading_parameter(t, g.delta, constants);
            let d2 = g.delta * g.delta;
            let force = match system {
                SystemSpec::UniformForce { force } => *force,
                _ => 0.0,
            };
            Ok(Moments {
                mean_q: g.q0 + g.p0 * t / m + force * t * t / (2.0 * m),
                mean_p: g.p0 + force * t,
                var_q: d2 * (1.0 + tau * tau) / 2.0,
                var_p: hbar * hbar / (2.0 * d2),
                correlation_k: hbar * hbar * t / (2.0 * m * d2),
            })
        }
        (SystemSpec::Harmonic { omega0 }, InitialState::HarmonicGaussian(h)) => {
            let frame = harmonic_frame(h, *omega0, t, constants);
            let (ar, ai) = (frame.width_re, frame.width_im);
            let squeeze = frame.squeeze;
            Ok(Moments {
                mean_q: frame.center,
                mean_p: -m * omega0 * h.center_amplitude * frame.sin,
                var_q: 1.0 / (2.0 * ar),
                var_p: hbar * hbar * (ar * ar + ai * ai) / (2.0 * ar),
                correlation_k: -hbar * (1.0 - squeeze) * frame.cos * frame.sin
                    / (2.0 * squeeze.sqrt()),
            })
        }
        _ => Err(Error::InvalidParameter(
            "initial state kind does not match the system kind".into(),
        )),
    }
}

/// Points `(q, p)` on the parabola traced by the ellipse center under a
/// uniform force, one per momentum sample.
pub fn center_parabola(
    params: &GaussianParams,
    force: f64,
    constants: PhysicalConstants,
    p_samples: &[f64],
) -> Result<Vec<(f64, f64)>> {
    constants.validate()?;
    params.validate()?;
    if force == 0.0 || !force.is_finite() {
        return Err(Error::ZeroForce);
    }
    let m = constants.mass;
    Ok(p_samples
        .iter()
        .map(|&p| {
            let dp = p - params.p0;
            (params.q0 + params.p0 * dp / (m * force) + dp * dp / (2.0 * m * force), p)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    use crate::curve::{fermi_branches, DerivativeScheme};
    use crate::ellipse::fit_ellipse;
    use crate::polar::DEFAULT_RHO_FLOOR_FRACTION;
    use crate::state::{gaussian_packet, moments};

    fn grid() -> Grid {
        Grid::new(-20.0, 20.0, 2048).unwrap()
    }

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn packet_params() -> GaussianParams {
        GaussianParams::new(0.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn free_evolution_at_zero_time_is_the_initial_packet() {
        let psi0 = gaussian_packet(&grid(), consts(), &packet_params()).unwrap();
        let psi = evolve_free(&grid(), consts(), &packet_params(), 0.0).unwrap();
        assert!(psi0.l2_distance(&psi).unwrap() < 1e-12);
    }

    #[test]
    fn free_spreading_doubles_position_variance_at_unit_tau() {
        let psi = evolve_free(&grid(), consts(), &packet_params(), 1.0).unwrap();
        let moments = moments(&psi);
        assert_relative_eq!(moments.var_q, 1.0, epsilon = 1e-7);
        assert_relative_eq!(moments.var_p, 0.5, epsilon = 1e-7);
        assert_relative_eq!(moments.correlation_k, 0.5, epsilon = 1e-7);
    }

    #[test]
    fn zero_force_evolution_reduces_to_free() {
        let free = evolve_free(&grid(), consts(), &packet_params(), 0.7).unwrap();
        let forced = evolve_uniform_force(&grid(), consts(), &packet_params(), 0.0, 0.7).unwrap();
        assert!(free.l2_distance(&forced).unwrap() < 1e-13);
    }

    #[test]
    fn unit_force_case_lands_center_at_expected_point() {
        // force 1.5, resting packet, unit time: center (0.75, 1.5)
        let params = GaussianParams::new(0.0, 0.0, 1.0).unwrap();
        let psi = evolve_uniform_force(&grid(), consts(), &params, 1.5, 1.0).unwrap();
        let moments = moments(&psi);
        assert_relative_eq!(moments.mean_q, 0.75, epsilon = 1e-8);
        assert_relative_eq!(moments.mean_p, 1.5, epsilon = 1e-8);
        // variances are force-independent
        assert_relative_eq!(moments.var_q, 1.0, epsilon = 1e-7);
        assert_relative_eq!(moments.var_p, 0.5, epsilon = 1e-7);
    }

    #[test]
    fn grid_moments_match_analytic_moments_for_all_systems() {
        let cases: Vec<(SystemSpec, InitialState, f64)> = vec![
            (SystemSpec::Free, InitialState::Gaussian(packet_params()), -1.0),
            (SystemSpec::Free, InitialState::Gaussian(packet_params()), 0.5),
            (
                SystemSpec::UniformForce { force: 1.5 },
                InitialState::Gaussian(GaussianParams::new(0.0, 0.0, 1.0).unwrap()),
                1.0,
            ),
            (
                SystemSpec::Harmonic { omega0: 1.0 },
                InitialState::HarmonicGaussian(
                    HarmonicGaussianParams::new(0.1f64.powf(0.25), 20.0f64.sqrt(), 0.0).unwrap(),
                ),
                PI / 4.0,
            ),
        ];
        for (system, initial, t) in cases {
            let psi = analytic_state(&grid(), consts(), &system, &initial, t).unwrap();
            let measured = moments(&psi);
            let expected = analytic_moments(&system, &initial, t, consts()).unwrap();
            assert_relative_eq!(measured.mean_q, expected.mean_q, epsilon = 1e-7);
            assert_relative_eq!(measured.mean_p, expected.mean_p, epsilon = 1e-7);
            assert_relative_eq!(measured.var_q, expected.var_q, epsilon = 1e-7, max_relative = 1e-7);
            assert_relative_eq!(measured.var_p, expected.var_p, epsilon = 1e-7, max_relative = 1e-7);
            assert_relative_eq!(
                measured.correlation_k,
                expected.correlation_k,
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn fitted_curve_matches_analytic_ellipse() {
        let cases: Vec<(SystemSpec, InitialState, f64)> = vec![
            (SystemSpec::Free, InitialState::Gaussian(packet_params()), 1.0),
            (
                SystemSpec::UniformForce { force: 1.5 },
                InitialState::Gaussian(GaussianParams::new(0.0, 0.0, 1.0).unwrap()),
                1.0,
            ),
            (
                SystemSpec::Harmonic { omega0: 1.0 },
                InitialState::HarmonicGaussian(
                    HarmonicGaussianParams::new(0.1f64.powf(0.25), 20.0f64.sqrt(), 0.0).unwrap(),
                ),
                PI / 4.0,
            ),
        ];
        for (system, initial, t) in cases {
            let psi = analytic_state(&grid(), consts(), &system, &initial, t).unwrap();
            let curve = fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)
                .unwrap();
            let fit = fit_ellipse(&curve).unwrap();
            let expected = analytic_ellipse(&system, &initial, t, consts()).unwrap();
            assert_relative_eq!(fit.coeffs.a, expected.a, max_relative = 1e-5);
            assert_relative_eq!(fit.coeffs.b, expected.b, max_relative = 1e-5);
            assert_relative_eq!(fit.coeffs.c, expected.c, max_relative = 1e-5, epsilon = 1e-5);
            assert_relative_eq!(fit.coeffs.center_q, expected.center_q, epsilon = 1e-5);
            assert_relative_eq!(fit.coeffs.center_p, expected.center_p, epsilon = 1e-5);
        }
    }

    #[test]
    fn uniform_force_ellipse_shape_is_force_independent() {
        let initial = InitialState::Gaussian(packet_params());
        for t in [-2.0, 0.5, 3.0] {
            let free = analytic_ellipse(&SystemSpec::Free, &initial, t, consts()).unwrap();
            let forced = analytic_ellipse(
                &SystemSpec::UniformForce { force: 1.5 },
                &initial,
                t,
                consts(),
            )
            .unwrap();
            assert_eq!(free.a, forced.a);
            assert_eq!(free.b, forced.b);
            assert_eq!(free.c, forced.c);
        }
    }

    #[test]
    fn ellipse_determinant_is_inverse_hbar_squared_everywhere() {
        let gaussian = InitialState::Gaussian(packet_params());
        for k in -3..=3 {
            let coeffs =
                analytic_ellipse(&SystemSpec::Free, &gaussian, k as f64, consts()).unwrap();
            assert_relative_eq!(coeffs.determinant(), 1.0, epsilon = 1e-12);
        }
        let harmonic = InitialState::HarmonicGaussian(
            HarmonicGaussianParams::new(0.1f64.powf(0.25), 20.0f64.sqrt(), 0.0).unwrap(),
        );
        for k in 0..16 {
            let t = 2.0 * PI * k as f64 / 16.0;
            let coeffs =
                analytic_ellipse(&SystemSpec::Harmonic { omega0: 1.0 }, &harmonic, t, consts())
                    .unwrap();
            assert_relative_eq!(coeffs.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_state_is_a_rigid_circle() {
        // squeeze parameter 1: inverse_width^2 = m omega0 / hbar
        let omega0 = 1.0;
        let params = HarmonicGaussianParams::new(1.0, 3.0, 0.0).unwrap();
        assert_relative_eq!(params.squeeze_parameter(omega0, consts()), 1.0, epsilon = 1e-15);
        let mut var_qs = Vec::new();
        for t in [0.0, 0.7, 1.9, 3.3, 5.1] {
            let psi = harmonic_state(&grid(), consts(), omega0, &params, t).unwrap();
            let moments = moments(&psi);
            var_qs.push(moments.var_q);
            assert_relative_eq!(moments.correlation_k, 0.0, epsilon = 1e-7);

            let curve = fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)
                .unwrap();
            let fit = fit_ellipse(&curve).unwrap();
            // in (q, p / (m omega0)) coordinates the curve is a circle of
            // radius sqrt(hbar / (m omega0))
            assert_relative_eq!(fit.coeffs.a, omega0, max_relative = 1e-6);
            assert_relative_eq!(fit.coeffs.b * omega0 * omega0, fit.coeffs.a, max_relative = 1e-6);
            let expected = analytic_ellipse(
                &SystemSpec::Harmonic { omega0 },
                &InitialState::HarmonicGaussian(params),
                t,
                consts(),
            )
            .unwrap();
            assert_relative_eq!(fit.coeffs.center_q, expected.center_q, epsilon = 1e-6);
            assert_relative_eq!(fit.coeffs.center_p, expected.center_p, epsilon = 1e-6);
        }
        for &v in &var_qs {
            assert_relative_eq!(v, var_qs[0], max_relative = 1e-9);
        }
    }

    #[test]
    fn harmonic_state_returns_after_a_period_up_to_phase() {
        let omega0 = 1.0;
        let params = HarmonicGaussianParams::new(0.1f64.powf(0.25), 20.0f64.sqrt(), 0.3).unwrap();
        let t = 0.4;
        let a = harmonic_state(&grid(), consts(), omega0, &params, t).unwrap();
        let b = harmonic_state(&grid(), consts(), omega0, &params, t + 2.0 * PI / omega0).unwrap();
        assert!(a.l2_distance_up_to_phase(&b).unwrap() < 1e-8);
        // the continuous branch makes the period return an exact sign flip
        assert!(a.l2_distance(&b).unwrap() > 1.9);
    }

    #[test]
    fn squeezed_correlation_at_mid_phase_has_the_closed_form_value() {
        let params = HarmonicGaussianParams::new(0.1f64.powf(0.25), 20.0f64.sqrt(), 0.0).unwrap();
        let moments = analytic_moments(
            &SystemSpec::Harmonic { omega0: 1.0 },
            &InitialState::HarmonicGaussian(params),
            PI / 4.0,
            consts(),
        )
        .unwrap();
        // -0.9 / (4 sqrt(0.1))
        assert_relative_eq!(moments.correlation_k, -0.9 / (4.0 * 0.1f64.sqrt()), epsilon = 1e-12);
        assert_relative_eq!(
            moments.var_q * moments.var_p - moments.correlation_k * moments.correlation_k,
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn parabola_passes_through_vertex_and_matches_centers() {
        let params = GaussianParams::new(0.0, 0.0, 1.0).unwrap();
        let points = center_parabola(&params, 1.0, consts(), &[0.0, 2.0]).unwrap();
        assert_relative_eq!(points[0].0, 0.0, epsilon = 1e-15);
        assert_relative_eq!(points[1].0, 2.0, epsilon = 1e-15);

        // eliminating t between the center formulas lands on the parabola
        let params = packet_params();
        let force = 1.5;
        for t in [1.0, 2.0, 3.0] {
            let coeffs = analytic_ellipse(
                &SystemSpec::UniformForce { force },
                &InitialState::Gaussian(params),
                t,
                consts(),
            )
            .unwrap();
            let on_parabola =
                center_parabola(&params, force, consts(), &[coeffs.center_p]).unwrap();
            assert_relative_eq!(on_parabola[0].0, coeffs.center_q, epsilon = 1e-12);
        }

        assert!(matches!(
            center_parabola(&params, 0.0, consts(), &[1.0]),
            Err(Error::ZeroForce)
        ));
    }

    #[test]
    fn mismatched_kind_is_rejected() {
        let bad = analytic_state(
            &grid(),
            consts(),
            &SystemSpec::Harmonic { omega0: 1.0 },
            &InitialState::Gaussian(packet_params()),
            0.0,
        );
        assert!(matches!(bad, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn escaping_packet_is_rejected() {
        let params = GaussianParams::new(0.0, 2.0, 1.0).unwrap();
        assert!(matches!(
            evolve_free(&grid(), consts(), &params, 9.0),
            Err(Error::PacketOutOfBox(_))
        ));
    }
}
