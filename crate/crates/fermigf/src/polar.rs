//! Polar decomposition `psi = rho e^{i theta}` with 1D phase unwrapping.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::state::WaveFunction;

/// Default amplitude floor: points with `rho < 1e-6 * max(rho)` are masked.
pub const DEFAULT_RHO_FLOOR_FRACTION: f64 = 1e-6;

/// Amplitude, unwrapped phase, and validity mask of a state.
///
/// `theta` is continuous (nearest-branch) along each maximal run of valid
/// points and restarts from the principal value after every masked gap;
/// it is zero wherever `valid` is false.
#[derive(Debug, Clone)]
pub struct PolarFields {
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub valid: Vec<bool>,
}

impl PolarFields {
    /// Index ranges (inclusive start, exclusive end) of maximal valid runs.
    pub fn valid_bands(&self) -> Vec<(usize, usize)> {
        bands_of(&self.valid)
    }
}

/// Maximal runs of `true` as (start, end) with `end` exclusive.
pub(crate) fn bands_of(mask: &[bool]) -> Vec<(usize, usize)> {
    let mut bands = Vec::new();
    let mut start = None;
    for (j, &ok) in mask.iter().enumerate() {
        match (ok, start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                bands.push((s, j));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        bands.push((s, mask.len()));
    }
    bands
}

/// Decompose `psi` into amplitude and unwrapped phase.
///
/// `rho_floor_fraction` must lie in `(0, 0.1]`; it sets the mask threshold
/// relative to the peak amplitude.
pub fn polar_decompose(psi: &WaveFunction, rho_floor_fraction: f64) -> Result<PolarFields> {
    if !(rho_floor_fraction > 0.0 && rho_floor_fraction <= 0.1) {
        return Err(Error::InvalidParameter(format!(
            "rho_floor_fraction must lie in (0, 0.1], got {rho_floor_fraction}"
        )));
    }
    let rho: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm()).collect();
    let peak = rho.iter().copied().fold(0.0_f64, f64::max);
    if !(peak > 0.0) {
        return Err(Error::AllMasked);
    }
    let floor = rho_floor_fraction * peak;
    let valid: Vec<bool> = rho.iter().map(|&r| r >= floor).collect();
    if !valid.iter().any(|&v| v) {
        return Err(Error::AllMasked);
    }

    let mut theta = vec![0.0; rho.len()];
    for (start, end) in bands_of(&valid) {
        // restart from the principal value after each masked gap
        let mut prev = psi.amplitudes()[start].arg();
        theta[start] = prev;
        for j in start + 1..end {
            let raw = psi.amplitudes()[j].arg();
            let mut jump = raw - prev;
            while jump > PI {
                jump -= 2.0 * PI;
            }
            while jump <= -PI {
                jump += 2.0 * PI;
            }
            theta[j] = prev + jump;
            prev = theta[j];
        }
    }
    Ok(PolarFields { rho, theta, valid })
}
