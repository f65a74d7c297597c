//! Prism-microscope measurement chain: Compton scattering kinematics,
//! linearization of the scattered frequency, the screen mapping, and a
//! three-experiment Monte Carlo estimation of the phase-space ellipse.
//!
//! The scattering system couples photon frequency to particle velocity;
//! after linearization, a dispersive prism turns the screen coordinate
//! into `xi = q + C p + 2 D q p`, so repeated position, momentum, and
//! prism records determine all five second moments of a Gaussian state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ellipse::{ellipse_from_moments, EllipseCoeffs};
use crate::error::{Error, Result};
use crate::state::Moments;

/// Upper bound on |beta0| accepted by the nonrelativistic solver.
pub const MAX_BETA0: f64 = 0.05;

/// Fixed experimental configuration for one scattering geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComptonConfig {
    /// Probe photon frequency before the collision.
    pub nu0: f64,
    /// Particle scattering angle (radians), fixed by coincidence gating.
    pub phi: f64,
    /// Particle mass.
    pub mass: f64,
    /// Speed of light.
    pub speed_of_light: f64,
    /// Planck constant.
    pub planck_h: f64,
}

impl ComptonConfig {
    pub fn new(
        nu0: f64,
        phi: f64,
        mass: f64,
        speed_of_light: f64,
        planck_h: f64,
    ) -> Result<Self> {
        if !(nu0 > 0.0) || !nu0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "probe frequency must be positive and finite, got {nu0}"
            )));
        }
        if !(phi > 0.0 && phi < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!(
                "scattering angle must lie in (0, pi), got {phi}"
            )));
        }
        for (name, v) in [("mass", mass), ("speed_of_light", speed_of_light), ("planck_h", planck_h)]
        {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { nu0, phi, mass, speed_of_light, planck_h })
    }

    /// `m c^2`.
    fn rest_energy(&self) -> f64 {
        self.mass * self.speed_of_light * self.speed_of_light
    }
}

/// One solved scattering event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComptonSolution {
    /// Scattered photon frequency.
    pub nu: f64,
    /// Particle speed after the collision, in units of c (non-negative;
    /// the direction is the configured angle).
    pub beta: f64,
    /// Photon scattering angle.
    pub theta: f64,
    /// Relative residuals of the three conservation equations.
    pub residuals: [f64; 3],
}

/// Energy and the two momentum components, combined into a single
/// function of the scattered frequency whose zero is the event.
///
/// With `P_x = h nu0 - m beta0 c^2` (initial momentum times c) and
/// `B(nu) = 2 m c^2 h (nu0 - nu) + (m beta0 c^2)^2` (the squared
/// final particle momentum times c^2, from energy conservation),
/// eliminating `theta` and `beta` gives
/// `F(nu) = P_x^2 - 2 P_x cos(phi) sqrt(B) + B - (h nu)^2`.
fn scattering_mismatch(config: &ComptonConfig, beta0: f64, nu: f64) -> f64 {
    let mc2 = config.rest_energy();
    let h = config.planck_h;
    let p_x = h * config.nu0 - config.mass * beta0 * config.speed_of_light * config.speed_of_light;
    let b = 2.0 * mc2 * h * (config.nu0 - nu) + (mc2 * beta0) * (mc2 * beta0);
    p_x * p_x - 2.0 * p_x * config.phi.cos() * b.sqrt() + b - (h * nu) * (h * nu)
}

/// Highest frequency with non-negative recoil energy.
fn frequency_cap(config: &ComptonConfig, beta0: f64) -> f64 {
    config.nu0 + config.rest_energy() * beta0 * beta0 / (2.0 * config.planck_h)
}

/// All mismatch roots inside `(0, upper]`, found by a sign-change scan
/// (uniform plus a geometric refinement around `nu0`, where the
/// no-interaction branch lives) followed by bisection.
fn mismatch_roots(config: &ComptonConfig, beta0: f64, upper: f64) -> Vec<f64> {
    let f = |nu: f64| scattering_mismatch(config, beta0, nu);
    let lower = config.nu0 * 1e-6;
    let mut knots: Vec<f64> = (0..=4096)
        .map(|i| lower + (upper - lower) * i as f64 / 4096.0)
        .collect();
    for g in 2..=13 {
        let offset = config.nu0 * 10f64.powi(-g);
        for candidate in [config.nu0 - offset, config.nu0 + offset] {
            if candidate > lower && candidate < upper {
                knots.push(candidate);
            }
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut roots = Vec::new();
    let values: Vec<f64> = knots.iter().map(|&nu| f(nu)).collect();
    for i in 0..knots.len() - 1 {
        if values[i] == 0.0 {
            roots.push(knots[i]);
            continue;
        }
        if values[i] * values[i + 1] < 0.0 {
            let (mut lo, mut hi) = (knots[i], knots[i + 1]);
            let mut f_lo = values[i];
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let f_mid = f(mid);
                if f_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if f_lo * f_mid < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    f_lo = f_mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    if *values.last().unwrap() == 0.0 {
        roots.push(*knots.last().unwrap());
    }
    roots
}

/// Solve the scattering system for the scattered (non-trivial) root at
/// the given initial particle velocity `beta0` (in units of c, signed:
/// positive means head-on toward the photon).
pub fn compton_solve(config: &ComptonConfig, beta0: f64) -> Result<ComptonSolution> {
    if beta0.abs() >= MAX_BETA0 {
        return Err(Error::RegimeViolation(beta0.abs()));
    }
    let upper = frequency_cap(config, beta0).min(config.nu0 * (1.0 + 10.0 * beta0.abs()) + f64::MIN_POSITIVE);
    let trivial = |nu: f64| (nu - config.nu0).abs() <= 1e-12 * config.nu0;
    let candidates: Vec<f64> = mismatch_roots(config, beta0, upper)
        .into_iter()
        .filter(|&nu| !trivial(nu))
        .collect();
    let nu = if beta0 == 0.0 {
        // at rest there is exactly one scattered root below nu0
        *candidates.last().ok_or(Error::NoRoot(upper))?
    } else {
        // track the branch continuously connected to the at-rest root
        let baseline_upper = frequency_cap(config, 0.0);
        let baseline = mismatch_roots(config, 0.0, baseline_upper)
            .into_iter()
            .filter(|&nu| !trivial(nu))
            .last()
            .ok_or(Error::NoRoot(baseline_upper))?;
        candidates
            .into_iter()
            .min_by(|a, b| (a - baseline).abs().total_cmp(&(b - baseline).abs()))
            .ok_or(Error::NoRoot(upper))?
    };

    // back-substitute the remaining unknowns
    let mc2 = config.rest_energy();
    let h = config.planck_h;
    let p_x = h * config.nu0 - mc2 * beta0;
    let b = (2.0 * mc2 * h * (config.nu0 - nu) + (mc2 * beta0) * (mc2 * beta0)).max(0.0);
    let recoil = b.sqrt(); // m beta c^2
    let beta = recoil / mc2;
    let theta = (recoil * config.phi.sin()).atan2(p_x - recoil * config.phi.cos());

    let energy_in = h * config.nu0 + 0.5 * mc2 * beta0 * beta0;
    let energy_out = h * nu + 0.5 * mc2 * beta * beta;
    let r1 = (energy_in - energy_out).abs() / energy_in;
    let px_out = h * nu * theta.cos() + recoil * config.phi.cos();
    let r2 = (p_x - px_out).abs() / (h * config.nu0 + mc2 * beta0.abs() + h * nu + recoil);
    let r3 = (h * nu * theta.sin() - recoil * config.phi.sin()).abs() / (h * nu + recoil);

    Ok(ComptonSolution { nu, beta, theta, residuals: [r1, r2, r3] })
}

/// First-order model `nu ~ intercept + slope * (beta0 - mean)` of the
/// scattered frequency around a mean velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComptonLinearization {
    pub intercept: f64,
    pub slope: f64,
    /// Largest deviation of the exact frequency from the linear model
    /// over `mean +- halfwidth`.
    pub max_residual: f64,
}

/// Linearize the scattered frequency at `beta0_mean`, with the slope
/// from a central difference of step `halfwidth / 10`.
pub fn compton_linearize(
    config: &ComptonConfig,
    beta0_mean: f64,
    beta0_halfwidth: f64,
) -> Result<ComptonLinearization> {
    if !(beta0_halfwidth > 0.0) || !beta0_halfwidth.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "linearization halfwidth must be positive, got {beta0_halfwidth}"
        )));
    }
    let intercept = compton_solve(config, beta0_mean)?.nu;
    let step = beta0_halfwidth / 10.0;
    let above = compton_solve(config, beta0_mean + step)?.nu;
    let below = compton_solve(config, beta0_mean - step)?.nu;
    let slope = (above - below) / (2.0 * step);
    let mut max_residual = 0.0f64;
    for k in 0..=20 {
        let beta0 = beta0_mean + beta0_halfwidth * (k as f64 / 10.0 - 1.0);
        let exact = compton_solve(config, beta0)?.nu;
        max_residual = max_residual.max((exact - intercept - slope * (beta0 - beta0_mean)).abs());
    }
    Ok(ComptonLinearization { intercept, slope, max_residual })
}

/// Instrument constants of the dispersive prism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrismConstants {
    /// Linear dispersion coefficient `C` (length per momentum).
    pub c_lin: f64,
    /// Quadratic coefficient `D` multiplying the symmetrized product.
    pub d_quad: f64,
}

impl PrismConstants {
    pub fn new(c_lin: f64, d_quad: f64) -> Result<Self> {
        if !c_lin.is_finite() || !d_quad.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "prism constants must be finite, got C = {c_lin}, D = {d_quad}"
            )));
        }
        Ok(Self { c_lin, d_quad })
    }
}

/// Screen coordinate of one record: `q + C p + 2 D q p` (the
/// symmetrized operator product reduces to `2qp` on sample values).
pub fn screen_position(q: f64, p: f64, prism: &PrismConstants) -> f64 {
    q + prism.c_lin * p + 2.0 * prism.d_quad * q * p
}

/// Draw `n` classical phase-space samples from the bivariate normal
/// with the given moments (valid as a measurement proxy because
/// Gaussian states have non-negative phase-space distributions).
pub fn sample_gaussian_state(
    moments: &Moments,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let det = moments.var_q * moments.var_p - moments.correlation_k * moments.correlation_k;
    if !(moments.var_q > 0.0) || !(det > 0.0) {
        return Err(Error::NonPositiveDefinite);
    }
    // Cholesky factor of [[var_q, K], [K, var_p]]
    let l11 = moments.var_q.sqrt();
    let l21 = moments.correlation_k / l11;
    let l22 = (moments.var_p - l21 * l21).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    Ok((0..n)
        .map(|_| {
            let z1: f64 = normal.sample(&mut rng);
            let z2: f64 = normal.sample(&mut rng);
            (moments.mean_q + l11 * z1, moments.mean_p + l21 * z1 + l22 * z2)
        })
        .collect())
}

/// Per-component standard errors of an estimated [`Moments`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentStandardErrors {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub correlation_k: f64,
}

/// Outcome of the repeated-preparation measurement campaign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    /// Samples per experiment.
    pub n: usize,
    pub estimate: Moments,
    pub std_errors: MomentStandardErrors,
}

/// One step of the splitmix64 sequence; used to derive independent
/// per-experiment seeds from a single scenario seed.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mean_and_variance(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

/// Run the three measurement campaigns — position records, momentum
/// records, and prism screen records — on independently drawn sample
/// sets, and return the estimated moments with standard errors.
///
/// The correlator estimate inverts the screen mean:
/// `K = (mean(xi) - mean(q) - C mean(p)) / (2D) - mean(q) mean(p)`.
pub fn estimate_moments(
    true_state: &Moments,
    prism: &PrismConstants,
    n: usize,
    seed: u64,
) -> Result<MeasurementRecord> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "moment estimation needs at least 2 samples per experiment, got {n}"
        )));
    }
    if prism.d_quad == 0.0 {
        return Err(Error::InvalidParameter(
            "correlator extraction requires a nonzero quadratic prism constant".into(),
        ));
    }
    let mut stream = seed;
    let seed_q = splitmix64(&mut stream);
    let seed_p = splitmix64(&mut stream);
    let seed_screen = splitmix64(&mut stream);

    let position_records = sample_gaussian_state(true_state, n, seed_q)?;
    let (mean_q, var_q) = mean_and_variance(position_records.iter().map(|s| s.0), n);

    let momentum_records = sample_gaussian_state(true_state, n, seed_p)?;
    let (mean_p, var_p) = mean_and_variance(momentum_records.iter().map(|s| s.1), n);

    let screen_samples = sample_gaussian_state(true_state, n, seed_screen)?;
    let (mean_xi, var_xi) = mean_and_variance(
        screen_samples.iter().map(|&(q, p)| screen_position(q, p, prism)),
        n,
    );

    let inv_2d = 1.0 / (2.0 * prism.d_quad);
    let correlation_k = (mean_xi - mean_q - prism.c_lin * mean_p) * inv_2d - mean_q * mean_p;

    let nf = n as f64;
    let var_factor = (2.0 / (nf - 1.0)).sqrt();
    // delta-method propagation through the three independent means
    let g_q = -(inv_2d + mean_p);
    let g_p = -(prism.c_lin * inv_2d + mean_q);
    let se_k = (inv_2d * inv_2d * var_xi / nf
        + g_q * g_q * var_q / nf
        + g_p * g_p * var_p / nf)
        .sqrt();

    let estimate = Moments { mean_q, mean_p, var_q, var_p, correlation_k };
    Ok(MeasurementRecord {
        n,
        estimate,
        std_errors: MomentStandardErrors {
            mean_q: (var_q / nf).sqrt(),
            mean_p: (var_p / nf).sqrt(),
            var_q: var_q * var_factor,
            var_p: var_p * var_factor,
            correlation_k: se_k,
        },
    })
}

/// [`estimate_moments`] followed by the moment-to-ellipse mapping.
///
/// A pure Gaussian state saturates the uncertainty bound exactly, so
/// sampling noise pushes the estimated moments below it in roughly half
/// of all runs at any sample size; those runs report the violation
/// instead of clamping the estimates.
pub fn reconstruct_ellipse_experiment(
    true_state: &Moments,
    prism: &PrismConstants,
    n: usize,
    seed: u64,
    hbar: f64,
) -> Result<(EllipseCoeffs, MeasurementRecord)> {
    let record = estimate_moments(true_state, prism, n, seed)?;
    let coeffs = ellipse_from_moments(&record.estimate, hbar)?;
    Ok((coeffs, record))
}
