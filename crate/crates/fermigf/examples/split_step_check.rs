//! Cross-check the split-step integrator against closed-form states:
//! propagate each preset to a few later times and report the L2
//! distance and the norm drift.

use fermigf::propagate::{propagate, PropagationPlan};
use fermigf::scenario::{
    free_spreading_preset, harmonic_squeezed_preset, uniform_force_preset,
};

fn main() -> Result<(), fermigf::error::Error> {
    for scenario in [
        free_spreading_preset(),
        uniform_force_preset(),
        harmonic_squeezed_preset(),
    ] {
        let name = scenario.name.clone().unwrap_or_default();
        let dt = scenario.propagation.as_ref().map_or(1e-3, |p| p.dt);
        let later: Vec<f64> = scenario
            .absolute_times()?
            .into_iter()
            .filter(|&t| t > 0.0)
            .take(3)
            .collect();
        println!("{name} (dt = {dt:.0e}):");
        let mut psi = scenario.state_at(0.0)?;
        let mut now = 0.0;
        for &t in &later {
            let span = t - now;
            let steps = (span / dt).ceil().max(1.0) as usize;
            let plan = PropagationPlan::new(scenario.system_spec(), span / steps as f64, steps)?;
            psi = propagate(&psi, &plan)?;
            now = t;
            let exact = scenario.state_at(t)?;
            println!(
                "  t = {t:6.3}: L2 distance {:.3e}, norm drift {:.3e}",
                exact.l2_distance_up_to_phase(&psi)?,
                (psi.norm() - 1.0).abs()
            );
        }
    }
    Ok(())
}
