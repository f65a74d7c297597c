//! Scenario files: a single JSON document describing the system, the
//! initial state, the grid, the observation times, and optional
//! propagation / phase-space / measurement parameters.
//!
//! Structural problems surface as JSON errors; semantic problems (bad
//! ranges, mismatched state and system kinds, unusable time units) are
//! reported as scenario errors. Both map to the CLI's invalid-input
//! exit code.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::dynamics::{analytic_state, HarmonicGaussianParams, InitialState, SystemSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::{superpose, GaussianParams, PhysicalConstants, WaveFunction};

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Free,
    UniformForce { force: f64 },
    Harmonic { omega0: f64 },
}

impl SystemConfig {
    pub fn to_spec(&self) -> SystemSpec {
        match *self {
            SystemConfig::Free => SystemSpec::Free,
            SystemConfig::UniformForce { force } => SystemSpec::UniformForce { force },
            SystemConfig::Harmonic { omega0 } => SystemSpec::Harmonic { omega0 },
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub q_min: f64,
    pub q_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GaussianConfig {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
}

impl GaussianConfig {
    fn to_params(&self) -> Result<GaussianParams> {
        GaussianParams::new(self.center, self.momentum, self.width)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Gaussian {
        center: f64,
        momentum: f64,
        width: f64,
    },
    HarmonicGaussian {
        inverse_width: f64,
        center_amplitude: f64,
        #[serde(default)]
        phase_offset: f64,
    },
    Superposition {
        first: GaussianConfig,
        second: GaussianConfig,
        /// Complex weight as `[re, im]`; the pair is normalized after
        /// superposition, so only the ratio matters.
        #[serde(default = "unit_weight")]
        weight_first: [f64; 2],
        #[serde(default = "unit_weight")]
        weight_second: [f64; 2],
    },
}

fn unit_weight() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    /// Raw time values.
    Absolute,
    /// Spreading parameter `hbar t / (m delta^2)` of a Gaussian packet.
    Tau,
    /// Oscillator phase `omega0 t` (harmonic systems only).
    Phase,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimesConfig {
    pub values: Vec<f64>,
    pub unit: TimeUnit,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    /// Integrator step; each requested time is reached by an integer
    /// number of steps of size at most this.
    pub dt: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    #[serde(default = "default_n_p")]
    pub n_p: usize,
    /// Contour level as a fraction of the field maximum.
    #[serde(default = "default_fraction")]
    pub fraction: f64,
}

fn default_n_p() -> usize {
    512
}

fn default_fraction() -> f64 {
    (-1.0f64).exp()
}

impl Default for WignerConfig {
    fn default() -> Self {
        Self { n_p: default_n_p(), fraction: default_fraction() }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PrismConfig {
    pub c_lin: f64,
    pub d_quad: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComptonScenarioConfig {
    pub nu0: f64,
    pub phi: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub speed_of_light: f64,
    #[serde(default = "one")]
    pub planck_h: f64,
    #[serde(default)]
    pub beta0_mean: f64,
    pub beta0_halfwidth: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    pub prism: PrismConfig,
    pub n_samples: usize,
    #[serde(default)]
    pub compton: Option<ComptonScenarioConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub system: SystemConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    pub grid: GridConfig,
    pub state: StateConfig,
    pub times: TimesConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub propagation: Option<PropagationConfig>,
    #[serde(default)]
    pub wigner: Option<WignerConfig>,
    #[serde(default)]
    pub measurement: Option<MeasurementConfig>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_file(path: &Path) -> Result<Scenario> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn constants(&self) -> Result<PhysicalConstants> {
        PhysicalConstants::new(self.constants.hbar, self.constants.mass)
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.q_min, self.grid.q_max, self.grid.n_points)
    }

    pub fn system_spec(&self) -> SystemSpec {
        self.system.to_spec()
    }

    /// Initial-condition descriptor for the closed-form dispatch;
    /// superpositions are handled per component instead.
    pub fn initial_state(&self) -> Result<Option<InitialState>> {
        Ok(match &self.state {
            StateConfig::Gaussian { center, momentum, width } => Some(InitialState::Gaussian(
                GaussianParams::new(*center, *momentum, *width)?,
            )),
            StateConfig::HarmonicGaussian { inverse_width, center_amplitude, phase_offset } => {
                Some(InitialState::HarmonicGaussian(HarmonicGaussianParams::new(
                    *inverse_width,
                    *center_amplitude,
                    *phase_offset,
                )?))
            }
            StateConfig::Superposition { .. } => None,
        })
    }

    /// Reference width used for dimensionless axes and the tau unit.
    pub fn reference_width(&self) -> Result<f64> {
        match &self.state {
            StateConfig::Gaussian { width, .. } => Ok(*width),
            StateConfig::HarmonicGaussian { inverse_width, .. } => Ok(1.0 / inverse_width),
            StateConfig::Superposition { first, second, .. } => {
                if first.width == second.width {
                    Ok(first.width)
                } else {
                    Err(Error::Scenario(
                        "superposition components have different widths; \
                         no single reference width exists"
                            .into(),
                    ))
                }
            }
        }
    }

    /// Observation times converted to absolute units.
    pub fn absolute_times(&self) -> Result<Vec<f64>> {
        let constants = self.constants()?;
        match self.times.unit {
            TimeUnit::Absolute => Ok(self.times.values.clone()),
            TimeUnit::Tau => {
                let delta = self.reference_width()?;
                let scale = constants.mass * delta * delta / constants.hbar;
                Ok(self.times.values.iter().map(|tau| tau * scale).collect())
            }
            TimeUnit::Phase => match self.system {
                SystemConfig::Harmonic { omega0 } => {
                    Ok(self.times.values.iter().map(|phase| phase / omega0).collect())
                }
                _ => Err(Error::Scenario(
                    "phase time unit requires a harmonic system".into(),
                )),
            },
        }
    }

    /// Closed-form state of the scenario at absolute time `t`.
    pub fn state_at(&self, t: f64) -> Result<WaveFunction> {
        let grid = self.build_grid()?;
        let constants = self.constants()?;
        let system = self.system_spec();
        match &self.state {
            StateConfig::Superposition { first, second, weight_first, weight_second } => {
                let a = analytic_state(
                    &grid,
                    constants,
                    &system,
                    &InitialState::Gaussian(first.to_params()?),
                    t,
                )?;
                let b = analytic_state(
                    &grid,
                    constants,
                    &system,
                    &InitialState::Gaussian(second.to_params()?),
                    t,
                )?;
                // linearity: evolving the components and superposing
                // equals evolving the superposition
                superpose(
                    &a,
                    &b,
                    Complex64::new(weight_first[0], weight_first[1]),
                    Complex64::new(weight_second[0], weight_second[1]),
                )
            }
            _ => {
                let initial = self.initial_state()?.expect("non-superposition state");
                analytic_state(&grid, constants, &system, &initial, t)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants()?;
        self.build_grid()?;
        self.system_spec().validate()?;
        match (&self.state, &self.system) {
            (StateConfig::HarmonicGaussian { .. }, SystemConfig::Harmonic { .. }) => {}
            (StateConfig::HarmonicGaussian { .. }, _) => {
                return Err(Error::Scenario(
                    "a harmonic-family initial state requires a harmonic system".into(),
                ));
            }
            (StateConfig::Gaussian { .. }, SystemConfig::Harmonic { .. }) => {
                return Err(Error::Scenario(
                    "a harmonic system requires a harmonic-family initial state".into(),
                ));
            }
            (StateConfig::Superposition { .. }, SystemConfig::Harmonic { .. }) => {
                return Err(Error::Scenario(
                    "superpositions are supported for free and uniform-force systems only"
                        .into(),
                ));
            }
            _ => {}
        }
        match &self.state {
            StateConfig::Gaussian { center, momentum, width } => {
                GaussianParams::new(*center, *momentum, *width)?;
            }
            StateConfig::HarmonicGaussian { inverse_width, center_amplitude, phase_offset } => {
                HarmonicGaussianParams::new(*inverse_width, *center_amplitude, *phase_offset)?;
            }
            StateConfig::Superposition { first, second, weight_first, weight_second } => {
                first.to_params()?;
                second.to_params()?;
                for w in [weight_first, weight_second] {
                    if !w[0].is_finite() || !w[1].is_finite() {
                        return Err(Error::Scenario(format!(
                            "superposition weight must be finite, got [{}, {}]",
                            w[0], w[1]
                        )));
                    }
                }
            }
        }
        if self.times.values.is_empty() {
            return Err(Error::Scenario("the time list is empty".into()));
        }
        if self.times.values.iter().any(|t| !t.is_finite()) {
            return Err(Error::Scenario("times must be finite".into()));
        }
        if self.times.unit == TimeUnit::Tau {
            self.reference_width()?;
        }
        if self.times.unit == TimeUnit::Phase && !matches!(self.system, SystemConfig::Harmonic { .. })
        {
            return Err(Error::Scenario("phase time unit requires a harmonic system".into()));
        }
        if let Some(p) = &self.propagation {
            if !(p.dt > 0.0) || !p.dt.is_finite() {
                return Err(Error::Scenario(format!(
                    "propagation step must be positive and finite, got {}",
                    p.dt
                )));
            }
        }
        if let Some(w) = &self.wigner {
            if w.n_p < 16 || !w.n_p.is_power_of_two() {
                return Err(Error::Scenario(format!(
                    "wigner.n_p must be a power of two of at least 16, got {}",
                    w.n_p
                )));
            }
            if !(w.fraction > 0.0 && w.fraction < 1.0) {
                return Err(Error::Scenario(format!(
                    "wigner.fraction must lie strictly between 0 and 1, got {}",
                    w.fraction
                )));
            }
        }
        if let Some(m) = &self.measurement {
            if m.n_samples < 2 {
                return Err(Error::Scenario(format!(
                    "measurement.n_samples must be at least 2, got {}",
                    m.n_samples
                )));
            }
            crate::measure::PrismConstants::new(m.prism.c_lin, m.prism.d_quad)?;
            if m.prism.d_quad == 0.0 {
                return Err(Error::Scenario(
                    "measurement requires a nonzero quadratic prism constant".into(),
                ));
            }
            if let Some(c) = &m.compton {
                crate::measure::ComptonConfig::new(
                    c.nu0,
                    c.phi,
                    c.mass,
                    c.speed_of_light,
                    c.planck_h,
                )?;
                if !(c.beta0_halfwidth > 0.0) {
                    return Err(Error::Scenario(format!(
                        "compton.beta0_halfwidth must be positive, got {}",
                        c.beta0_halfwidth
                    )));
                }
                if c.beta0_mean.abs() + c.beta0_halfwidth >= crate::measure::MAX_BETA0 {
                    return Err(Error::Scenario(format!(
                        "compton velocity window reaches {}, outside the regime bound {}",
                        c.beta0_mean.abs() + c.beta0_halfwidth,
                        crate::measure::MAX_BETA0
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Preset: free packet spreading through `tau = -3..3` (unit width,
/// momentum 2).
pub fn free_spreading_preset() -> Scenario {
    Scenario {
        name: Some("free_spreading".into()),
        system: SystemConfig::Free,
        constants: ConstantsConfig::default(),
        grid: GridConfig { q_min: -40.0, q_max: 40.0, n_points: 2048 },
        state: StateConfig::Gaussian { center: 0.0, momentum: 2.0, width: 1.0 },
        times: TimesConfig {
            values: vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
            unit: TimeUnit::Tau,
        },
        seed: 20080 + 1,
        propagation: Some(PropagationConfig { dt: 1e-3 }),
        wigner: Some(WignerConfig::default()),
        measurement: None,
    }
}

/// Preset: the same packet under a uniform force of dimensionless
/// strength `m delta^3 F0 / hbar^2 = 1.5`, starting at rest.
pub fn uniform_force_preset() -> Scenario {
    Scenario {
        name: Some("uniform_force".into()),
        system: SystemConfig::UniformForce { force: 1.5 },
        constants: ConstantsConfig::default(),
        grid: GridConfig { q_min: -40.0, q_max: 40.0, n_points: 2048 },
        state: StateConfig::Gaussian { center: 0.0, momentum: 0.0, width: 1.0 },
        times: TimesConfig {
            values: vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
            unit: TimeUnit::Tau,
        },
        seed: 20080 + 2,
        propagation: Some(PropagationConfig { dt: 1e-3 }),
        wigner: Some(WignerConfig::default()),
        measurement: None,
    }
}

/// Preset: squeezed harmonic Gaussian (squeeze parameter 0.1, center
/// energy `m omega0 Q0^2 / hbar = 20`) over eight evenly spaced phases.
pub fn harmonic_squeezed_preset() -> Scenario {
    // squeeze B = (hbar alpha^2 / (m omega0))^2 = 0.1 at hbar=m=omega0=1
    let alpha = 0.1f64.powf(0.25);
    Scenario {
        name: Some("harmonic_squeezed".into()),
        system: SystemConfig::Harmonic { omega0: 1.0 },
        constants: ConstantsConfig::default(),
        grid: GridConfig { q_min: -40.0, q_max: 40.0, n_points: 2048 },
        state: StateConfig::HarmonicGaussian {
            inverse_width: alpha,
            center_amplitude: 20.0f64.sqrt(),
            phase_offset: 0.0,
        },
        times: TimesConfig {
            values: (0..8).map(|k| k as f64 * std::f64::consts::PI / 4.0).collect(),
            unit: TimeUnit::Phase,
        },
        seed: 20080 + 3,
        propagation: Some(PropagationConfig { dt: 1e-3 }),
        wigner: Some(WignerConfig::default()),
        measurement: None,
    }
}

/// Preset: symmetric two-Gaussian superposition (centers `+-3`, zero
/// momentum) whose enclosed area is not conserved under free motion.
pub fn superposition_preset() -> Scenario {
    Scenario {
        name: Some("two_packet_superposition".into()),
        system: SystemConfig::Free,
        constants: ConstantsConfig::default(),
        grid: GridConfig { q_min: -40.0, q_max: 40.0, n_points: 2048 },
        state: StateConfig::Superposition {
            first: GaussianConfig { center: -3.0, momentum: 0.0, width: 1.0 },
            second: GaussianConfig { center: 3.0, momentum: 0.0, width: 1.0 },
            weight_first: [1.0, 0.0],
            weight_second: [1.0, 0.0],
        },
        times: TimesConfig {
            values: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            unit: TimeUnit::Tau,
        },
        seed: 20080 + 4,
        propagation: Some(PropagationConfig { dt: 1e-3 }),
        wigner: Some(WignerConfig::default()),
        measurement: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets_validate_and_round_trip_through_json() {
        for preset in [
            free_spreading_preset(),
            uniform_force_preset(),
            harmonic_squeezed_preset(),
            superposition_preset(),
        ] {
            preset.validate().unwrap();
            let text = serde_json::to_string_pretty(&preset).unwrap();
            let parsed = Scenario::from_json(&text).unwrap();
            assert_eq!(parsed, preset);
        }
    }

    #[test]
    fn tau_times_scale_with_the_squared_width() {
        let mut scenario = free_spreading_preset();
        scenario.state = StateConfig::Gaussian { center: 0.0, momentum: 0.0, width: 2.0 };
        let times = scenario.absolute_times().unwrap();
        assert_relative_eq!(times[6], 3.0 * 4.0); // tau * m delta^2 / hbar
    }

    #[test]
    fn phase_times_divide_by_the_oscillator_frequency() {
        let mut scenario = harmonic_squeezed_preset();
        scenario.system = SystemConfig::Harmonic { omega0: 2.0 };
        let times = scenario.absolute_times().unwrap();
        assert_relative_eq!(times[4], std::f64::consts::PI / 2.0);
    }

    #[test]
    fn kind_mismatches_are_rejected() {
        let mut scenario = free_spreading_preset();
        scenario.system = SystemConfig::Harmonic { omega0: 1.0 };
        assert!(matches!(scenario.validate(), Err(Error::Scenario(_))));

        let mut scenario = harmonic_squeezed_preset();
        scenario.system = SystemConfig::Free;
        assert!(matches!(scenario.validate(), Err(Error::Scenario(_))));

        let mut scenario = superposition_preset();
        scenario.system = SystemConfig::Harmonic { omega0: 1.0 };
        assert!(matches!(scenario.validate(), Err(Error::Scenario(_))));
    }

    #[test]
    fn structural_and_semantic_errors_are_distinguished() {
        let err = Scenario::from_json("{not json").unwrap_err();
        assert!(matches!(err, Error::Json(_)));

        let mut scenario = free_spreading_preset();
        scenario.times.values.clear();
        assert!(matches!(scenario.validate(), Err(Error::Scenario(_))));

        let mut scenario = free_spreading_preset();
        scenario.wigner = Some(WignerConfig { n_p: 100, fraction: 0.5 });
        assert!(matches!(scenario.validate(), Err(Error::Scenario(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut value = serde_json::to_value(free_spreading_preset()).unwrap();
        value["surprise"] = serde_json::json!(1);
        assert!(matches!(
            Scenario::from_json(&value.to_string()),
            Err(Error::Json(_))
        ));
    }

    #[test]
    fn superposed_states_evolve_by_linearity() {
        let scenario = superposition_preset();
        let t = 0.8;
        let direct = scenario.state_at(t).unwrap();
        // compare against propagating the t=0 superposition numerically
        let initial = scenario.state_at(0.0).unwrap();
        let plan = crate::propagate::PropagationPlan::new(
            scenario.system_spec(),
            t / 800.0,
            800,
        )
        .unwrap();
        let propagated = crate::propagate::propagate(&initial, &plan).unwrap();
        assert!(direct.l2_distance_up_to_phase(&propagated).unwrap() < 1e-7);
    }

    #[test]
    fn harmonic_scenario_states_match_the_closed_form() {
        let scenario = harmonic_squeezed_preset();
        let times = scenario.absolute_times().unwrap();
        let psi = scenario.state_at(times[2]).unwrap();
        assert_relative_eq!(psi.norm(), 1.0, epsilon = 1e-12);
    }
}
