//! The curve plus one amplitude anchor determines the state: rebuild
//! wave functions from their branch data and report the phase-aligned
//! round-trip distance.

use fermigf::curve::{
    fermi_branches, reconstruct_wavefunction, DerivativeScheme, ReconstructionAnchor,
};
use fermigf::polar::DEFAULT_RHO_FLOOR_FRACTION;
use fermigf::scenario::free_spreading_preset;

fn main() -> Result<(), fermigf::error::Error> {
    let scenario = free_spreading_preset();
    for (&tau, &t) in scenario.times.values.iter().zip(&scenario.absolute_times()?) {
        let psi = scenario.state_at(t)?;
        let curve = fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)?;
        let anchor = ReconstructionAnchor::at_density_peak(&psi);
        let rebuilt = reconstruct_wavefunction(&curve, &anchor)?;
        println!(
            "tau = {tau:+.1}: anchor at q = {:+.4}, round-trip L2 distance {:.3e}",
            anchor.q,
            psi.l2_distance_up_to_phase(&rebuilt)?
        );
    }
    Ok(())
}
