//! Wave functions on the grid: construction, superposition, and moments.

use num_complex::Complex64;

use crate::deriv::{fft_in_place, spectral_derivative};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Planck constant (reduced) and particle mass; both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        let c = Self { hbar, mass };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0 && self.mass.is_finite() && self.mass > 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "constants must be positive, got hbar = {}, mass = {}",
                self.hbar, self.mass
            )));
        }
        Ok(())
    }
}

/// Center, mean momentum, and width of a Gaussian packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub q0: f64,
    pub p0: f64,
    pub delta: f64,
}

impl GaussianParams {
    pub fn new(q0: f64, p0: f64, delta: f64) -> Result<Self> {
        let p = Self { q0, p0, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0 && self.q0.is_finite() && self.p0.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "gaussian parameters must be finite with delta > 0, got delta = {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// First and second moments of a state: means, variances, and the
/// symmetrized position-momentum correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub correlation_k: f64,
}

impl Moments {
    /// Left-hand side of the generalized uncertainty relation,
    /// `var_q*var_p - k^2`; equals `hbar^2/4` for pure Gaussian states.
    pub fn uncertainty_lhs(&self) -> f64 {
        self.var_q * self.var_p - self.correlation_k * self.correlation_k
    }
}

/// Ratio of edge amplitude to peak amplitude above which a state is
/// rejected as not fitting inside the box.
const EDGE_AMPLITUDE_RATIO: f64 = 1e-8;
/// Norm below which a vector counts as cancelled to zero.
const ZERO_NORM: f64 = 1e-12;

/// A normalized single-particle state sampled on a [`Grid`].
///
/// Construction guarantees unit norm (within 1e-10 of the grid quadrature)
/// and negligible amplitude at the box edges.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Grid,
    constants: PhysicalConstants,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    /// Build a state from raw samples, normalizing to unit grid norm.
    pub fn from_amplitudes(
        grid: Grid,
        constants: PhysicalConstants,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        constants.validate()?;
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {} does not match grid size {}",
                amplitudes.len(),
                grid.len()
            )));
        }
        let mut wf = Self { grid, constants, amplitudes };
        let norm = wf.norm();
        if !norm.is_finite() || norm < ZERO_NORM {
            return Err(Error::ZeroVector);
        }
        for amp in &mut wf.amplitudes {
            *amp /= norm;
        }
        wf.check_edges()?;
        Ok(wf)
    }

    /// Internal constructor for unitary pipelines (the propagator) that
    /// must not mask norm drift by renormalizing.
    pub(crate) fn from_amplitudes_unnormalized(
        grid: Grid,
        constants: PhysicalConstants,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let wf = Self { grid, constants, amplitudes };
        let norm = wf.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "unnormalized constructor expects norm near 1, got {norm}"
            )));
        }
        wf.check_edges()?;
        Ok(wf)
    }

    fn check_edges(&self) -> Result<()> {
        let peak = self
            .amplitudes
            .iter()
            .map(|a| a.norm())
            .fold(0.0_f64, f64::max);
        let edge = self.amplitudes[0]
            .norm()
            .max(self.amplitudes[self.grid.len() - 1].norm());
        if edge > EDGE_AMPLITUDE_RATIO * peak {
            return Err(Error::PacketOutOfBox(format!(
                "edge amplitude is {:.3e} of the peak (limit {:.0e})",
                edge / peak,
                EDGE_AMPLITUDE_RATIO
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Grid quadrature norm `sqrt(sum |psi|^2 dq)`.
    pub fn norm(&self) -> f64 {
        let dq = self.grid.dq();
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * dq).sqrt()
    }

    /// Probability density `|psi|^2` per grid point.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Inner product `<self|other>` by grid quadrature.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        self.require_same_frame(other)?;
        let dq = self.grid.dq();
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * dq)
    }

    /// L2 distance to another state on the same grid.
    pub fn l2_distance(&self, other: &WaveFunction) -> Result<f64> {
        self.require_same_frame(other)?;
        let dq = self.grid.dq();
        Ok((self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * dq)
            .sqrt())
    }

    /// L2 distance after removing the optimal global phase
    /// (`min over phi of ||self - e^{i phi} other||`).
    ///
    /// The optimal phase is the argument of the overlap; the residual is
    /// evaluated elementwise rather than as `sqrt(2 - 2|<self|other>|)`,
    /// which bottoms out at `sqrt(2 eps)` for nearly identical states.
    pub fn l2_distance_up_to_phase(&self, other: &WaveFunction) -> Result<f64> {
        let overlap = self.inner(other)?;
        let rotation = if overlap.norm() > 0.0 {
            Complex64::from_polar(1.0, -overlap.arg())
        } else {
            Complex64::new(1.0, 0.0)
        };
        let sum: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - rotation * b).norm_sqr())
            .sum();
        Ok((sum * self.grid.dq()).sqrt())
    }

    pub(crate) fn require_same_frame(&self, other: &WaveFunction) -> Result<()> {
        if self.grid != other.grid || self.constants != other.constants {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Momentum values (sorted ascending) and momentum-space density
    /// `|phi(p)|^2` on the grid's conjugate momenta `p = hbar k`.
    ///
    /// The density integrates to the squared norm with spacing
    /// `dp = 2 pi hbar / L` (discrete Parseval identity).
    pub fn momentum_density(&self) -> (Vec<f64>, Vec<f64>) {
        let dq = self.grid.dq();
        let hbar = self.constants.hbar;
        let mut spectrum = self.amplitudes.clone();
        fft_in_place(&mut spectrum);
        let norm_factor = dq * dq / (2.0 * std::f64::consts::PI * hbar);
        let k = self.grid.wavenumbers();
        let mut pairs: Vec<(f64, f64)> = spectrum
            .iter()
            .enumerate()
            .map(|(j, c)| (hbar * k[j], c.norm_sqr() * norm_factor))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.into_iter().unzip()
    }

    /// Mass fraction carried by the outer 10% of the momentum range;
    /// a proxy for momentum-grid aliasing.
    pub fn momentum_tail_mass(&self) -> f64 {
        let (p, dens) = self.momentum_density();
        let dp = p[1] - p[0];
        let p_max = p.last().unwrap().abs().max(p[0].abs());
        let cutoff = 0.9 * p_max;
        let total: f64 = dens.iter().sum::<f64>() * dp;
        let tail: f64 = p
            .iter()
            .zip(&dens)
            .filter(|(pv, _)| pv.abs() >= cutoff)
            .map(|(_, d)| d)
            .sum::<f64>()
            * dp;
        tail / total
    }
}

/// Construct the minimum-uncertainty Gaussian packet
/// `psi(q) = (sqrt(pi) delta)^(-1/2) exp[-(q-q0)^2/(2 delta^2) + i p0 (q-q0)/hbar]`.
///
/// The packet's 8-delta support must fit inside the box.
pub fn gaussian_packet(
    grid: &Grid,
    constants: PhysicalConstants,
    params: &GaussianParams,
) -> Result<WaveFunction> {
    constants.validate()?;
    params.validate()?;
    require_support_in_box(grid, params.q0, params.delta)?;
    let norm = (std::f64::consts::PI.sqrt() * params.delta).sqrt().recip();
    let amps = grid
        .positions()
        .iter()
        .map(|&q| {
            let dq0 = q - params.q0;
            let envelope = (-dq0 * dq0 / (2.0 * params.delta * params.delta)).exp();
            let phase = params.p0 * dq0 / constants.hbar;
            Complex64::from_polar(norm * envelope, phase)
        })
        .collect();
    WaveFunction::from_amplitudes(*grid, constants, amps)
}

/// Error unless `center ± 8 delta` lies inside the box.
pub(crate) fn require_support_in_box(grid: &Grid, center: f64, delta: f64) -> Result<()> {
    let lo = center - 8.0 * delta;
    let hi = center + 8.0 * delta;
    if lo < grid.q_min() || hi > grid.q_max() {
        return Err(Error::PacketOutOfBox(format!(
            "support [{lo:.3}, {hi:.3}] exceeds the box [{}, {}]",
            grid.q_min(),
            grid.q_max()
        )));
    }
    Ok(())
}

/// Weighted superposition `w1 psi1 + w2 psi2`, renormalized.
pub fn superpose(
    psi1: &WaveFunction,
    psi2: &WaveFunction,
    w1: Complex64,
    w2: Complex64,
) -> Result<WaveFunction> {
    psi1.require_same_frame(psi2)?;
    let amps: Vec<Complex64> = psi1
        .amplitudes()
        .iter()
        .zip(psi2.amplitudes())
        .map(|(a, b)| w1 * a + w2 * b)
        .collect();
    WaveFunction::from_amplitudes(*psi1.grid(), psi1.constants(), amps)
}

/// Compute means, variances, and the symmetrized correlation.
///
/// Position moments use grid quadrature of `|psi|^2`; the momentum mean
/// uses the phase-gradient integral `hbar Im(psi* psi')`; the momentum
/// variance uses momentum-space quadrature of `|phi(p)|^2`; the
/// correlation is `hbar int q Im(psi* psi') dq - <q><p>`.
pub fn moments(psi: &WaveFunction) -> Moments {
    let grid = psi.grid();
    let dq = grid.dq();
    let hbar = psi.constants().hbar;
    let qs = grid.positions();
    let dens = psi.density();

    let mut mean_q = 0.0;
    for (j, &q) in qs.iter().enumerate() {
        mean_q += q * dens[j];
    }
    mean_q *= dq;
    let mut var_q = 0.0;
    for (j, &q) in qs.iter().enumerate() {
        var_q += (q - mean_q) * (q - mean_q) * dens[j];
    }
    var_q *= dq;

    // hbar rho^2 theta' = hbar Im(psi* psi'), valid down to rho -> 0
    let dpsi = spectral_derivative(grid, psi.amplitudes(), 1);
    let flux: Vec<f64> = psi
        .amplitudes()
        .iter()
        .zip(&dpsi)
        .map(|(a, d)| hbar * (a.conj() * d).im)
        .collect();
    let mean_p: f64 = flux.iter().sum::<f64>() * dq;
    let mut qp = 0.0;
    for (j, &q) in qs.iter().enumerate() {
        qp += q * flux[j];
    }
    qp *= dq;
    let correlation_k = qp - mean_q * mean_p;

    let (ps, pdens) = psi.momentum_density();
    let dp = ps[1] - ps[0];
    let mean_p_spectral: f64 = ps.iter().zip(&pdens).map(|(p, d)| p * d).sum::<f64>() * dp;
    let var_p: f64 = ps
        .iter()
        .zip(&pdens)
        .map(|(p, d)| (p - mean_p_spectral) * (p - mean_p_spectral) * d)
        .sum::<f64>()
        * dp;

    Moments { mean_q, mean_p, var_q, var_p, correlation_k }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_frame() -> (Grid, PhysicalConstants) {
        (Grid::new(-20.0, 20.0, 2048).unwrap(), PhysicalConstants::default())
    }

    #[test]
    fn packet_peak_density_matches_closed_form() {
        // |psi(q0)|^2 = 1/(sqrt(pi) delta) for the minimum packet
        let (grid, consts) = unit_frame();
        let params = GaussianParams::new(0.0, 0.0, 1.0).unwrap();
        let psi = gaussian_packet(&grid, consts, &params).unwrap();
        let j = grid.nearest_index(0.0).unwrap();
        assert_relative_eq!(
            psi.density()[j],
            1.0 / std::f64::consts::PI.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn packet_is_real_and_even_for_zero_momentum() {
        let (grid, consts) = unit_frame();
        let psi =
            gaussian_packet(&grid, consts, &GaussianParams::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        let n = grid.len();
        for j in 0..n {
            assert!(psi.amplitudes()[j].im.abs() < 1e-14);
        }
        // even about q0 = 0: node n/2 is q = 0, mirror pairs around it
        for j in 1..n / 2 {
            assert_relative_eq!(
                psi.amplitudes()[n / 2 + j].re,
                psi.amplitudes()[n / 2 - j].re,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn packet_norm_is_unit() {
        let (grid, consts) = unit_frame();
        let psi =
            gaussian_packet(&grid, consts, &GaussianParams::new(3.0, 1.0, 0.5).unwrap()).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn packet_out_of_box_is_rejected() {
        let (grid, consts) = unit_frame();
        let err = gaussian_packet(&grid, consts, &GaussianParams::new(15.0, 0.0, 1.0).unwrap());
        assert!(matches!(err, Err(Error::PacketOutOfBox(_))));
    }

    #[test]
    fn moments_of_offset_packet_match_independent_quadrature() {
        // oracle: direct trapezoid quadrature with finite-difference phase
        // gradient, entirely independent of the spectral implementation
        let (grid, consts) = unit_frame();
        let params = GaussianParams::new(3.0, 1.0, 0.5).unwrap();
        let psi = gaussian_packet(&grid, consts, &params).unwrap();
        let m = moments(&psi);

        let dq = grid.dq();
        let qs = grid.positions();
        let dens = psi.density();
        let oracle_mean_q: f64 = qs.iter().zip(&dens).map(|(q, d)| q * d).sum::<f64>() * dq;
        let amps = psi.amplitudes();
        let mut oracle_mean_p = 0.0;
        for j in 2..grid.len() - 2 {
            let dpsi = (-amps[j + 2] + amps[j + 1] * 8.0 - amps[j - 1] * 8.0 + amps[j - 2])
                / (12.0 * dq);
            oracle_mean_p += (amps[j].conj() * dpsi).im;
        }
        oracle_mean_p *= dq;

        assert_relative_eq!(m.mean_q, oracle_mean_q, epsilon = 1e-10);
        assert_relative_eq!(m.mean_q, 3.0, epsilon = 1e-8);
        assert_relative_eq!(m.mean_p, oracle_mean_p, epsilon = 1e-6);
        assert_relative_eq!(m.mean_p, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn minimum_packet_moments_are_half_half_zero() {
        let (grid, consts) = unit_frame();
        let psi =
            gaussian_packet(&grid, consts, &GaussianParams::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        let m = moments(&psi);
        assert_relative_eq!(m.var_q, 0.5, epsilon = 1e-10);
        assert_relative_eq!(m.var_p, 0.5, epsilon = 1e-10);
        assert!(m.correlation_k.abs() < 1e-10);
        assert_relative_eq!(m.uncertainty_lhs(), 0.25, epsilon = 1e-10);
    }

    #[test]
    fn phase_gradient_and_spectral_momentum_means_agree() {
        let (grid, consts) = unit_frame();
        for (q0, p0, delta) in [(0.0, 2.0, 1.0), (-2.0, -1.5, 0.7), (4.0, 0.3, 1.6)] {
            let psi =
                gaussian_packet(&grid, consts, &GaussianParams::new(q0, p0, delta).unwrap())
                    .unwrap();
            let (ps, pdens) = psi.momentum_density();
            let dp = ps[1] - ps[0];
            let spectral_mean: f64 =
                ps.iter().zip(&pdens).map(|(p, d)| p * d).sum::<f64>() * dp;
            let m = moments(&psi);
            assert_relative_eq!(m.mean_p, spectral_mean, epsilon = 1e-8);
        }
    }

    #[test]
    fn superpose_identity_weights_preserve_state() {
        let (grid, consts) = unit_frame();
        let psi =
            gaussian_packet(&grid, consts, &GaussianParams::new(1.0, 0.5, 1.0).unwrap()).unwrap();
        let zero = gaussian_packet(&grid, consts, &GaussianParams::new(-1.0, 0.0, 1.0).unwrap())
            .unwrap();
        let same = superpose(&psi, &zero, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            .unwrap();
        assert!(psi.l2_distance(&same).unwrap() < 1e-12);
    }

    #[test]
    fn superposed_packets_overlap_matches_closed_form() {
        // <psi1|psi2> = exp(-(q1-q2)^2/(4 delta^2)) for equal-width,
        // zero-momentum packets; separation 6 delta gives e^{-9}
        let (grid, consts) = unit_frame();
        let a = gaussian_packet(&grid, consts, &GaussianParams::new(-3.0, 0.0, 1.0).unwrap())
            .unwrap();
        let b = gaussian_packet(&grid, consts, &GaussianParams::new(3.0, 0.0, 1.0).unwrap())
            .unwrap();
        let overlap = a.inner(&b).unwrap();
        assert_relative_eq!(overlap.re, (-9.0_f64).exp(), max_relative = 1e-10);
        assert!(overlap.im.abs() < 1e-12);
        // probability overlap is interference-free at this separation
        assert!(overlap.norm_sqr() < 1e-6);

        let sum = superpose(&a, &b, 1.0.into(), 1.0.into()).unwrap();
        let dens = sum.density();
        let peak_left = grid.nearest_index(-3.0).unwrap();
        let peak_right = grid.nearest_index(3.0).unwrap();
        assert_relative_eq!(dens[peak_left], dens[peak_right], max_relative = 1e-10);
    }

    #[test]
    fn cancelling_superposition_is_zero_vector() {
        let (grid, consts) = unit_frame();
        let psi =
            gaussian_packet(&grid, consts, &GaussianParams::new(0.0, 1.0, 1.0).unwrap()).unwrap();
        let err = superpose(&psi, &psi, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0));
        assert!(matches!(err, Err(Error::ZeroVector)));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let (grid, consts) = unit_frame();
        let other = Grid::new(-10.0, 10.0, 1024).unwrap();
        let a = gaussian_packet(&grid, consts, &GaussianParams::new(0.0, 0.0, 1.0).unwrap())
            .unwrap();
        let b = gaussian_packet(&other, consts, &GaussianParams::new(0.0, 0.0, 1.0).unwrap())
            .unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert!(matches!(superpose(&a, &b, one, one), Err(Error::GridMismatch)));
    }

    #[test]
    fn momentum_density_integrates_to_one_and_centers_at_p0() {
        let (grid, consts) = unit_frame();
        let psi =
            gaussian_packet(&grid, consts, &GaussianParams::new(0.0, 2.0, 1.0).unwrap()).unwrap();
        let (ps, dens) = psi.momentum_density();
        let dp = ps[1] - ps[0];
        let total: f64 = dens.iter().sum::<f64>() * dp;
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        let mean: f64 = ps.iter().zip(&dens).map(|(p, d)| p * d).sum::<f64>() * dp;
        assert_relative_eq!(mean, 2.0, epsilon = 1e-10);
    }
}
