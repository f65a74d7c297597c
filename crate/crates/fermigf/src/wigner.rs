//! Wigner distribution of a gridded state, level-set contours, and the
//! point-set distance used to compare contours against the `g_F = 0`
//! curve.
//!
//! `W(q, p) = (1/pi hbar) int psi*(q + y) psi(q - y) e^{2ipy/hbar} dy` is
//! discretized with `y` on a half-step grid; the state is refined onto
//! that grid by zero-padded Fourier interpolation (exact for band-limited
//! data), and the oscillatory kernel becomes a plain FFT per row.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::deriv::{fft_in_place, ifft_in_place};
use crate::error::{Error, Result};
use crate::state::WaveFunction;

/// A real field sampled on a rectangular phase-space lattice
/// (row-major: `values[i_q * n_p + i_p]`).
#[derive(Debug, Clone)]
pub struct PhaseSpaceField {
    pub q_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub values: Vec<f64>,
}

impl PhaseSpaceField {
    pub fn n_q(&self) -> usize {
        self.q_values.len()
    }

    pub fn n_p(&self) -> usize {
        self.p_values.len()
    }

    pub fn value(&self, iq: usize, ip: usize) -> f64 {
        self.values[iq * self.n_p() + ip]
    }

    pub fn dq(&self) -> f64 {
        self.q_values[1] - self.q_values[0]
    }

    pub fn dp(&self) -> f64 {
        self.p_values[1] - self.p_values[0]
    }

    /// Diagonal of one lattice cell, the natural resolution scale for
    /// contour comparisons.
    pub fn cell_diagonal(&self) -> f64 {
        self.dq().hypot(self.dp())
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(q, p)` location of the maximum sample.
    pub fn argmax(&self) -> (f64, f64) {
        let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
        for iq in 0..self.n_q() {
            for ip in 0..self.n_p() {
                let v = self.value(iq, ip);
                if v > best {
                    best = v;
                    at = (iq, ip);
                }
            }
        }
        (self.q_values[at.0], self.p_values[at.1])
    }

    /// `∬ values dq dp`.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dq() * self.dp()
    }

    /// `∫ values dp` per position sample.
    pub fn q_marginal(&self) -> Vec<f64> {
        let dp = self.dp();
        (0..self.n_q())
            .map(|iq| (0..self.n_p()).map(|ip| self.value(iq, ip)).sum::<f64>() * dp)
            .collect()
    }

    /// `∫ values dq` per momentum sample.
    pub fn p_marginal(&self) -> Vec<f64> {
        let dq = self.dq();
        (0..self.n_p())
            .map(|ip| (0..self.n_q()).map(|iq| self.value(iq, ip)).sum::<f64>() * dq)
            .collect()
    }
}

/// Refine a state onto a half-step grid by zero-padding its spectrum
/// (the Nyquist bin is split symmetrically).
fn refine_double(amps: &[Complex64]) -> Vec<Complex64> {
    let n = amps.len();
    let mut spectrum = amps.to_vec();
    fft_in_place(&mut spectrum);
    let mut padded = vec![Complex64::default(); 2 * n];
    padded[..n / 2].copy_from_slice(&spectrum[..n / 2]);
    for k in 1..n / 2 {
        padded[2 * n - k] = spectrum[n - k];
    }
    let half_nyquist = spectrum[n / 2] / 2.0;
    padded[n / 2] = half_nyquist;
    padded[3 * n / 2] = half_nyquist;
    ifft_in_place(&mut padded);
    let scale = 1.0 / n as f64;
    padded.iter_mut().for_each(|a| *a *= scale);
    padded
}

/// Wigner distribution of the state on the conjugate momentum lattice
/// `p_k = 2 pi hbar k / (n_p dq)`, `k` in `[-n_p/2, n_p/2)`.
pub fn wigner_transform(psi: &WaveFunction, n_p: usize) -> Result<PhaseSpaceField> {
    if n_p < 16 || !n_p.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "momentum sample count must be a power of two of at least 16, got {n_p}"
        )));
    }
    let tail = psi.momentum_tail_mass();
    if tail > 1e-8 {
        log::warn!("momentum tail mass {tail:.3e} risks aliasing in the transform");
    }
    let grid = psi.grid();
    let hbar = psi.constants().hbar;
    let n = grid.len();
    let dq = grid.dq();
    let half_step = dq / 2.0;
    let fine = refine_double(psi.amplitudes());

    let p_values: Vec<f64> = (0..n_p)
        .map(|k| {
            let signed = k as isize - (n_p / 2) as isize;
            2.0 * std::f64::consts::PI * hbar * signed as f64 / (n_p as f64 * dq)
        })
        .collect();

    let mut planner = FftPlanner::new();
    let inverse = planner.plan_fft_inverse(n_p);
    let prefactor = half_step / (std::f64::consts::PI * hbar);
    let fine_len = fine.len() as isize;

    let mut values = vec![0.0; n * n_p];
    let mut row = vec![Complex64::default(); n_p];
    let mut worst_residue = 0.0f64;
    for j in 0..n {
        let center = 2 * j as isize;
        row.iter_mut().for_each(|c| *c = Complex64::default());
        // The kernel is periodic in l with period n_p, so the whole
        // correlation (bounded only by the box) folds into n_p bins;
        // conjugate pairs +-l always land together, keeping the
        // transform real to rounding.
        let reach = center.min(fine_len - 1 - center);
        for l in -reach..=reach {
            let c = fine[(center + l) as usize].conj() * fine[(center - l) as usize];
            row[l.rem_euclid(n_p as isize) as usize] += c;
        }
        inverse.process(&mut row);
        for (k, out) in row.iter().enumerate() {
            worst_residue = worst_residue.max((prefactor * out.im).abs());
            // shift so the momentum axis is ascending
            let ip = (k + n_p / 2) % n_p;
            values[j * n_p + ip] = prefactor * out.re;
        }
    }
    if worst_residue >= 1e-10 {
        return Err(Error::SpectralResidue(worst_residue));
    }
    Ok(PhaseSpaceField { q_values: grid.positions(), p_values, values })
}

/// Lattice edge carrying a contour crossing; `Q` edges run along the
/// position axis, `P` edges along the momentum axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum EdgeKey {
    Q { iq: usize, ip: usize },
    P { iq: usize, ip: usize },
}

fn edge_point(field: &PhaseSpaceField, level: f64, key: EdgeKey) -> (f64, f64) {
    let (qa, pa, qb, pb, va, vb) = match key {
        EdgeKey::Q { iq, ip } => (
            field.q_values[iq],
            field.p_values[ip],
            field.q_values[iq + 1],
            field.p_values[ip],
            field.value(iq, ip),
            field.value(iq + 1, ip),
        ),
        EdgeKey::P { iq, ip } => (
            field.q_values[iq],
            field.p_values[ip],
            field.q_values[iq],
            field.p_values[ip + 1],
            field.value(iq, ip),
            field.value(iq, ip + 1),
        ),
    };
    let t = ((level - va) / (vb - va)).clamp(0.0, 1.0);
    (qa + t * (qb - qa), pa + t * (pb - pa))
}

/// Level-set points of the field at `fraction * max(field)`, traced with
/// marching squares and concatenated one connected component after
/// another.
pub fn contour_fraction(field: &PhaseSpaceField, fraction: f64) -> Result<Vec<(f64, f64)>> {
    let components = contour_components(field, fraction)?;
    Ok(components.into_iter().flatten().collect())
}

/// Level-set polylines of the field at `fraction * max(field)`, one per
/// connected component.
pub fn contour_components(
    field: &PhaseSpaceField,
    fraction: f64,
) -> Result<Vec<Vec<(f64, f64)>>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "contour fraction must lie strictly between 0 and 1, got {fraction}"
        )));
    }
    let level = fraction * field.max_value();
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    let high = |iq: usize, ip: usize| field.value(iq, ip) >= level;
    for iq in 0..field.n_q() - 1 {
        for ip in 0..field.n_p() - 1 {
            let mask = (high(iq, ip) as usize)
                | (high(iq + 1, ip) as usize) << 1
                | (high(iq + 1, ip + 1) as usize) << 2
                | (high(iq, ip + 1) as usize) << 3;
            let bottom = EdgeKey::Q { iq, ip };
            let top = EdgeKey::Q { iq, ip: ip + 1 };
            let left = EdgeKey::P { iq, ip };
            let right = EdgeKey::P { iq: iq + 1, ip };
            match mask {
                0 | 15 => {}
                1 => segments.push((left, bottom)),
                2 => segments.push((bottom, right)),
                3 => segments.push((left, right)),
                4 => segments.push((top, right)),
                5 | 10 => {
                    let center = 0.25
                        * (field.value(iq, ip)
                            + field.value(iq + 1, ip)
                            + field.value(iq, ip + 1)
                            + field.value(iq + 1, ip + 1));
                    let diagonal_connected = (center >= level) == (mask == 5);
                    if diagonal_connected {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((top, right));
                    }
                }
                6 => segments.push((bottom, top)),
                7 => segments.push((left, top)),
                8 => segments.push((left, top)),
                9 => segments.push((bottom, top)),
                11 => segments.push((top, right)),
                12 => segments.push((left, right)),
                13 => segments.push((bottom, right)),
                14 => segments.push((left, bottom)),
                _ => unreachable!(),
            }
        }
    }
    if segments.is_empty() {
        return Err(Error::EmptyContour(level));
    }

    // chain segments into polylines: each edge joins at most two segments
    use std::collections::BTreeMap;
    let mut adjacency: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (idx, &(a, b)) in segments.iter().enumerate() {
        adjacency.entry(a).or_default().push(idx);
        adjacency.entry(b).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut components = Vec::new();
    for start_idx in 0..segments.len() {
        if used[start_idx] {
            continue;
        }
        // walk forward from both ends of the starting segment
        let mut chain = vec![segments[start_idx].0, segments[start_idx].1];
        used[start_idx] = true;
        for pass in 0..2 {
            loop {
                let tip = *chain.last().unwrap();
                let next = adjacency[&tip].iter().copied().find(|&s| !used[s]);
                let Some(seg) = next else { break };
                used[seg] = true;
                let (a, b) = segments[seg];
                chain.push(if a == tip { b } else { a });
            }
            if pass == 0 {
                chain.reverse();
            }
        }
        components
            .push(chain.into_iter().map(|key| edge_point(field, level, key)).collect());
    }
    Ok(components)
}

/// Resample a polyline so consecutive points are at most `max_spacing`
/// apart, subdividing each segment uniformly. With `closed` the segment
/// from the last point back to the first is included. Comparing curves
/// through point-set distances needs this: raw vertex sets can have
/// gaps much wider than the underlying curves' separation.
pub fn densify_polyline(
    points: &[(f64, f64)],
    closed: bool,
    max_spacing: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(max_spacing > 0.0 && max_spacing.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "max_spacing must be positive and finite, got {max_spacing}"
        )));
    }
    if points.len() < 2 {
        return Ok(points.to_vec());
    }
    let mut out = Vec::with_capacity(points.len());
    let last_segment = if closed { points.len() } else { points.len() - 1 };
    for i in 0..last_segment {
        let (q0, p0) = points[i];
        let (q1, p1) = points[(i + 1) % points.len()];
        let length = (q1 - q0).hypot(p1 - p0);
        let pieces = (length / max_spacing).ceil().max(1.0) as usize;
        for r in 0..pieces {
            let t = r as f64 / pieces as f64;
            out.push((q0 + t * (q1 - q0), p0 + t * (p1 - p0)));
        }
    }
    if !closed {
        out.push(points[points.len() - 1]);
    }
    Ok(out)
}

/// Symmetric Hausdorff distance between two point sets.
pub fn hausdorff_distance(set_a: &[(f64, f64)], set_b: &[(f64, f64)]) -> Result<f64> {
    if set_a.is_empty() || set_b.is_empty() {
        return Err(Error::EmptySet);
    }
    let directed = |from: &[(f64, f64)], to: &[(f64, f64)]| {
        from.iter()
            .map(|&(qa, pa)| {
                to.iter()
                    .map(|&(qb, pb)| (qa - qb).hypot(pa - pb))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(set_a, set_b).max(directed(set_b, set_a)))
}
