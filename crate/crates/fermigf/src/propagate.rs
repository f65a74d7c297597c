//! Numerical propagator: second-order Strang splitting with a spectral
//! kinetic factor on the periodic grid. Serves as the independent check
//! of the closed-form evolutions and evolves superpositions that have no
//! closed form in the harmonic well.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::deriv::spectral_derivative;
use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::state::WaveFunction;

/// A propagation plan: system, step, and step count.
///
/// Steps may be negative (backwards evolution). Steps larger than
/// `0.01 m dq^2 / hbar` are accepted but logged as a resolution warning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlan {
    pub system: SystemSpec,
    pub dt: f64,
    pub n_steps: usize,
}

impl PropagationPlan {
    pub fn new(system: SystemSpec, dt: f64, n_steps: usize) -> Result<Self> {
        system.validate()?;
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be finite and nonzero, got {dt}"
            )));
        }
        Ok(Self { system, dt, n_steps })
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

fn potential(system: &SystemSpec, mass: f64, q: f64) -> f64 {
    match *system {
        SystemSpec::Free => 0.0,
        SystemSpec::UniformForce { force } => -force * q,
        SystemSpec::Harmonic { omega0 } => 0.5 * mass * omega0 * omega0 * q * q,
    }
}

/// Evolve a state by `n_steps` Strang-split steps
/// (half potential, full kinetic, half potential).
///
/// The kinetic factor is exact on the periodic grid, so the scheme is
/// unitary up to rounding; the output keeps whatever norm drift
/// accumulates instead of being renormalized.
pub fn propagate(psi: &WaveFunction, plan: &PropagationPlan) -> Result<WaveFunction> {
    PropagationPlan::new(plan.system, plan.dt, plan.n_steps)?;
    let grid = *psi.grid();
    let constants = psi.constants();
    if plan.n_steps == 0 {
        return Ok(psi.clone());
    }
    let (hbar, m) = (constants.hbar, constants.mass);
    let dq = grid.dq();
    let n = grid.len();

    let step_bound = 0.01 * m * dq * dq / hbar;
    if plan.dt.abs() > step_bound {
        log::warn!(
            "time step {:.3e} exceeds the resolution bound {:.3e} for this grid",
            plan.dt,
            step_bound
        );
    }
    let tail = psi.momentum_tail_mass();
    if tail > 1e-8 {
        log::warn!("input momentum tail mass {tail:.3e} risks aliasing during propagation");
    }

    let phase = |v: f64, dt: f64| Complex64::from_polar(1.0, -v * dt / hbar);
    let half_v: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&q| phase(potential(&plan.system, m, q), plan.dt / 2.0))
        .collect();
    let full_v: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&q| phase(potential(&plan.system, m, q), plan.dt))
        .collect();
    // fold the inverse-transform 1/n into the kinetic multiplier
    let kinetic: Vec<Complex64> = grid
        .wavenumbers()
        .iter()
        .map(|&k| phase(hbar * hbar * k * k / (2.0 * m), plan.dt) / n as f64)
        .collect();

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut amps = psi.amplitudes().to_vec();
    for (a, v) in amps.iter_mut().zip(&half_v) {
        *a *= v;
    }
    for step in 0..plan.n_steps {
        forward.process(&mut amps);
        for (a, k) in amps.iter_mut().zip(&kinetic) {
            *a *= k;
        }
        inverse.process(&mut amps);
        if step + 1 < plan.n_steps {
            for (a, v) in amps.iter_mut().zip(&full_v) {
                *a *= v;
            }
        }
    }
    for (a, v) in amps.iter_mut().zip(&half_v) {
        *a *= v;
    }

    let out = WaveFunction::from_amplitudes_unnormalized(grid, constants, amps)?;
    let tail = out.momentum_tail_mass();
    if tail > 1e-8 {
        log::warn!("output momentum tail mass {tail:.3e} indicates aliasing occurred");
    }
    Ok(out)
}

/// Total energy `<T> + <V>` of a state in the given system.
pub fn total_energy(psi: &WaveFunction, system: &SystemSpec) -> Result<f64> {
    system.validate()?;
    let constants = psi.constants();
    let (hbar, m) = (constants.hbar, constants.mass);
    let grid = psi.grid();
    let dq = grid.dq();
    let dpsi = spectral_derivative(grid, psi.amplitudes(), 1);
    let kinetic: f64 =
        dpsi.iter().map(|d| d.norm_sqr()).sum::<f64>() * dq * hbar * hbar / (2.0 * m);
    let pot: f64 = psi
        .amplitudes()
        .iter()
        .zip(grid.positions())
        .map(|(a, q)| potential(system, m, q) * a.norm_sqr())
        .sum::<f64>()
        * dq;
    Ok(kinetic + pot)
}
