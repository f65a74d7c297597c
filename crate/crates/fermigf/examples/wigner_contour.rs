//! The 1/e level set of the phase-space (Wigner) distribution of a
//! Gaussian state coincides with the zero-level curve: compute both on
//! a 512x512 field and report the Hausdorff distance in cell diagonals.

use fermigf::curve::{fermi_branches, DerivativeScheme};
use fermigf::polar::DEFAULT_RHO_FLOOR_FRACTION;
use fermigf::scenario::free_spreading_preset;
use fermigf::wigner::{
    contour_components, densify_polyline, hausdorff_distance, wigner_transform,
};

fn main() -> Result<(), fermigf::error::Error> {
    let mut scenario = free_spreading_preset();
    scenario.grid.q_min = -34.0;
    scenario.grid.q_max = 34.0;
    scenario.grid.n_points = 512;
    println!("tau    contour pts   curve pts   Hausdorff / cell diagonal");
    for (&tau, &t) in scenario.times.values.iter().zip(&scenario.absolute_times()?) {
        let psi = scenario.state_at(t)?;
        let field = wigner_transform(&psi, 512)?;
        let diagonal = field.cell_diagonal();
        let spacing = diagonal / 4.0;
        let mut level_points = Vec::new();
        for component in contour_components(&field, (-1.0f64).exp())? {
            level_points.extend(densify_polyline(&component, false, spacing)?);
        }
        let curve = fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)?;
        let mut curve_points = Vec::new();
        for loop_points in curve.real_branch_loops() {
            curve_points.extend(densify_polyline(&loop_points, true, spacing)?);
        }
        let distance = hausdorff_distance(&level_points, &curve_points)?;
        println!(
            "{tau:+.1}     {:7}      {:7}      {:.3}",
            level_points.len(),
            curve_points.len(),
            distance / diagonal
        );
    }
    Ok(())
}
