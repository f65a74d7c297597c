//! Squeezed oscillator states: the curve stays an ellipse whose shape
//! breathes with twice the oscillator frequency while the coefficient
//! determinant a*b - c^2 stays pinned to 1/hbar^2, and an unsqueezed
//! state traces a rigid circle of radius sqrt(hbar / (m omega0)).

use fermigf::curve::{fermi_branches, DerivativeScheme};
use fermigf::dynamics::{
    analytic_ellipse, harmonic_state, HarmonicGaussianParams, InitialState, SystemSpec,
};
use fermigf::ellipse::fit_ellipse;
use fermigf::grid::Grid;
use fermigf::polar::DEFAULT_RHO_FLOOR_FRACTION;
use fermigf::scenario::harmonic_squeezed_preset;
use fermigf::state::PhysicalConstants;

fn main() -> Result<(), fermigf::error::Error> {
    let scenario = harmonic_squeezed_preset();
    println!("squeezed preset (determinant check):");
    println!("phase     a_fit      b_fit      c_fit      ab - c^2");
    for (&phase, &t) in scenario.times.values.iter().zip(&scenario.absolute_times()?) {
        let fit = fit_ellipse(&fermi_branches(
            &scenario.state_at(t)?,
            DerivativeScheme::Spectral,
            DEFAULT_RHO_FLOOR_FRACTION,
        )?)?
        .coeffs;
        println!(
            "{phase:5.3}  {:+9.5}  {:+9.5}  {:+9.5}   {:.12}",
            fit.a,
            fit.b,
            fit.c,
            fit.determinant()
        );
    }

    println!("\nunsqueezed (coherent) state at omega0 = 2:");
    let omega0 = 2.0;
    let constants = PhysicalConstants::default();
    let grid = Grid::new(-20.0, 20.0, 2048)?;
    let alpha = (constants.mass * omega0 / constants.hbar).sqrt();
    let params = HarmonicGaussianParams::new(alpha, 1.5, 0.0)?;
    let radius = (constants.hbar / (constants.mass * omega0)).sqrt();
    println!("target radius sqrt(hbar/(m omega0)) = {radius:.9}");
    for k in 0..4 {
        let t = k as f64 * std::f64::consts::PI / (2.0 * omega0);
        let psi = harmonic_state(&grid, constants, omega0, &params, t)?;
        let curve = fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)?;
        let exact = analytic_ellipse(
            &SystemSpec::Harmonic { omega0 },
            &InitialState::HarmonicGaussian(params),
            t,
            constants,
        )?;
        let worst = curve
            .real_branch_points()
            .into_iter()
            .map(|(q, p)| {
                let r = ((q - exact.center_q).powi(2)
                    + ((p - exact.center_p) / (constants.mass * omega0)).powi(2))
                .sqrt();
                (r - radius).abs()
            })
            .fold(0.0f64, f64::max);
        println!(
            "phase {:.3}: center ({:+.4}, {:+.4}), worst radius deviation {worst:.3e}",
            omega0 * t,
            exact.center_q,
            exact.center_p
        );
    }
    Ok(())
}
