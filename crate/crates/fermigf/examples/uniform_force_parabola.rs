//! A uniform force leaves the curve's shape identical to the free case;
//! only the center moves, and it slides along a parabola in the
//! (center_p, center_q) plane.

use fermigf::curve::{fermi_branches, DerivativeScheme};
use fermigf::dynamics::{analytic_state, center_parabola, InitialState, SystemSpec};
use fermigf::ellipse::fit_ellipse;
use fermigf::polar::DEFAULT_RHO_FLOOR_FRACTION;
use fermigf::scenario::uniform_force_preset;
use fermigf::state::GaussianParams;

fn main() -> Result<(), fermigf::error::Error> {
    let scenario = uniform_force_preset();
    let constants = scenario.constants()?;
    let grid = scenario.build_grid()?;
    let force = match scenario.system_spec() {
        SystemSpec::UniformForce { force } => force,
        _ => unreachable!(),
    };
    let params = GaussianParams::new(0.0, 0.0, 1.0)?;
    println!("tau     shape diff vs free   center (q, p)          parabola q(center_p)");
    for (&tau, &t) in scenario.times.values.iter().zip(&scenario.absolute_times()?) {
        let forced = fit_ellipse(&fermi_branches(
            &scenario.state_at(t)?,
            DerivativeScheme::Spectral,
            DEFAULT_RHO_FLOOR_FRACTION,
        )?)?
        .coeffs;
        let free_state = analytic_state(
            &grid,
            constants,
            &SystemSpec::Free,
            &InitialState::Gaussian(params),
            t,
        )?;
        let free = fit_ellipse(&fermi_branches(
            &free_state,
            DerivativeScheme::Spectral,
            DEFAULT_RHO_FLOOR_FRACTION,
        )?)?
        .coeffs;
        let shape_diff = (forced.a - free.a)
            .abs()
            .max((forced.b - free.b).abs())
            .max((forced.c - free.c).abs());
        let on_parabola = center_parabola(&params, force, constants, &[forced.center_p])?[0].0;
        println!(
            "{tau:+.1}    {shape_diff:.3e}            ({:+.6}, {:+.6})   {:+.6}",
            forced.center_q, forced.center_p, on_parabola
        );
    }
    Ok(())
}
