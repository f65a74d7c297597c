//! Extract the zero-level curve of a freely spreading Gaussian packet
//! at several times; the fitted conic tracks the closed form and the
//! enclosed area stays pinned to pi * hbar while the ellipse stretches.

use fermigf::curve::{enclosed_area, fermi_branches, DerivativeScheme};
use fermigf::dynamics::analytic_ellipse;
use fermigf::ellipse::fit_ellipse;
use fermigf::polar::DEFAULT_RHO_FLOOR_FRACTION;
use fermigf::scenario::free_spreading_preset;

fn main() -> Result<(), fermigf::error::Error> {
    let scenario = free_spreading_preset();
    let constants = scenario.constants()?;
    let initial = scenario.initial_state()?.expect("preset has a closed form");
    let system = scenario.system_spec();
    println!("tau      a_fit     b_fit     c_fit    |  a_exact  b_exact  c_exact  |  area/hbar");
    for (&tau, &t) in scenario.times.values.iter().zip(&scenario.absolute_times()?) {
        let psi = scenario.state_at(t)?;
        let curve = fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)?;
        let fit = fit_ellipse(&curve)?.coeffs;
        let exact = analytic_ellipse(&system, &initial, t, constants)?;
        let area = enclosed_area(&curve)?;
        println!(
            "{tau:+.1}   {:+.5}  {:+.5}  {:+.5} | {:+.5} {:+.5} {:+.5} |  {:.9}",
            fit.a,
            fit.b,
            fit.c,
            exact.a,
            exact.b,
            exact.c,
            area / constants.hbar
        );
    }
    println!("\n(pi = {:.9})", std::f64::consts::PI);
    Ok(())
}
