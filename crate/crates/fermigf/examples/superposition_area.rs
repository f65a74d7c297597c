//! Area conservation is a Gaussian privilege: for a superposition of
//! two displaced packets the enclosed area drifts as the state evolves.
//! The evolution here is driven by the split-step integrator, so the
//! area change is measured on numerically propagated states.

use fermigf::curve::{enclosed_area, fermi_branches, DerivativeScheme};
use fermigf::polar::DEFAULT_RHO_FLOOR_FRACTION;
use fermigf::propagate::{propagate, PropagationPlan};
use fermigf::scenario::superposition_preset;

fn main() -> Result<(), fermigf::error::Error> {
    let scenario = superposition_preset();
    let area_of = |psi: &fermigf::state::WaveFunction| -> Result<f64, fermigf::error::Error> {
        enclosed_area(&fermi_branches(
            psi,
            DerivativeScheme::Spectral,
            DEFAULT_RHO_FLOOR_FRACTION,
        )?)
    };
    let mut psi = scenario.state_at(0.0)?;
    let base = area_of(&psi)?;
    println!("two packets at -3 and +3, zero momentum; area(0) = {base:.6}");
    println!("tau    area      area/area0 - 1");
    let dt = 1e-3;
    let mut now = 0.0;
    for &t in scenario.absolute_times()?.iter().filter(|&&t| t > 0.0) {
        let span = t - now;
        let steps = (span / dt).ceil().max(1.0) as usize;
        let plan = PropagationPlan::new(scenario.system_spec(), span / steps as f64, steps)?;
        psi = propagate(&psi, &plan)?;
        now = t;
        let area = area_of(&psi)?;
        println!("{t:.1}    {area:.6}  {:+.4}", area / base - 1.0);
    }
    Ok(())
}
