//! CLI command implementations.
//!
//! Each `run_*` function takes a parsed scenario, computes its products,
//! and writes data files plus a JSON summary under the output directory.
//! Scenario-driven outputs are deterministic: the same scenario file,
//! seed, and flags produce byte-identical files. (Verification reports
//! embed wall-clock timings and are exempt.)

use std::path::PathBuf;

use serde_json::json;

use crate::curve::{
    enclosed_area, fermi_branches, reconstruct_wavefunction, DerivativeScheme, FermiCurve,
    ReconstructionAnchor,
};
use crate::dynamics::analytic_ellipse;
use crate::ellipse::{ellipse_area, ellipse_from_moments, fit_ellipse, EllipseCoeffs};
use crate::error::{Error, Result};
use crate::measure::{
    compton_linearize, compton_solve, estimate_moments, sample_gaussian_state, screen_position,
    splitmix64, ComptonConfig, MeasurementRecord, PrismConstants,
};
use crate::output::{
    summary_number, write_contour_csv, write_curve_csv, write_field_binary, write_field_csv,
    write_json, write_measurement_csv, write_moments_csv, write_wavefunction_csv, MomentsRow,
};
use crate::polar::DEFAULT_RHO_FLOOR_FRACTION;
use crate::propagate::{propagate, PropagationPlan};
use crate::scenario::Scenario;
use crate::state::{moments, Moments, WaveFunction};
use crate::verify::{all_passed, run_all, ToleranceProfile};
use crate::wigner::{
    contour_components, densify_polyline, hausdorff_distance, wigner_transform,
};

/// Flags shared by every CLI command.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Lead CSV rows with the dimensionless column block.
    pub dimensionless: bool,
    /// Replaces the scenario's seed when set.
    pub seed_override: Option<u64>,
    pub profile: ToleranceProfile,
}

impl RunOptions {
    fn prepare(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn effective_seed(&self, scenario: &Scenario) -> u64 {
        self.seed_override.unwrap_or(scenario.seed)
    }
}

fn extract(psi: &WaveFunction) -> Result<FermiCurve> {
    fermi_branches(psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)
}

struct TimeEntry {
    index: usize,
    /// Absolute time.
    time: f64,
    /// The same time in the scenario's declared unit.
    scenario_units: f64,
}

fn time_entries(scenario: &Scenario) -> Result<Vec<TimeEntry>> {
    Ok(scenario
        .absolute_times()?
        .into_iter()
        .zip(scenario.times.values.iter().copied())
        .enumerate()
        .map(|(index, (time, scenario_units))| TimeEntry { index, time, scenario_units })
        .collect())
}

/// Map a fallible sub-result to JSON: the value on success, an
/// `{"error": ...}` object otherwise. Used for derived diagnostics that
/// may legitimately not exist (e.g. a conic fit of a two-lobe curve).
fn value_or_error<T>(
    result: Result<T>,
    to_value: impl FnOnce(T) -> serde_json::Value,
) -> serde_json::Value {
    match result {
        Ok(v) => to_value(v),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn ellipse_json(coeffs: &EllipseCoeffs) -> serde_json::Value {
    json!({
        "a": summary_number(coeffs.a),
        "b": summary_number(coeffs.b),
        "c": summary_number(coeffs.c),
        "center_q": summary_number(coeffs.center_q),
        "center_p": summary_number(coeffs.center_p),
    })
}

fn moments_json(m: &Moments) -> serde_json::Value {
    json!({
        "mean_q": summary_number(m.mean_q),
        "mean_p": summary_number(m.mean_p),
        "var_q": summary_number(m.var_q),
        "var_p": summary_number(m.var_p),
        "correlation_k": summary_number(m.correlation_k),
    })
}

fn base_summary(command: &str, scenario: &Scenario, options: &RunOptions) -> serde_json::Value {
    json!({
        "command": command,
        "scenario": scenario.name,
        "time_unit": serde_json::to_value(scenario.times.unit).expect("unit serializes"),
        "dimensionless_first": options.dimensionless,
    })
}

/// `curve`: per-time branch tables plus fitted and closed-form conics.
pub fn run_curve(scenario: &Scenario, options: &RunOptions) -> Result<serde_json::Value> {
    options.prepare()?;
    let reference_width = scenario.reference_width()?;
    let constants = scenario.constants()?;
    let initial = scenario.initial_state()?;
    let system = scenario.system_spec();
    let mut entries = Vec::new();
    for entry in time_entries(scenario)? {
        let psi = scenario.state_at(entry.time)?;
        let curve = extract(&psi)?;
        let file = format!("curve_{:02}.csv", entry.index);
        write_curve_csv(&options.path(&file), &curve, reference_width, options.dimensionless)?;
        let closed_form = match &initial {
            Some(init) => Some(ellipse_json(&analytic_ellipse(&system, init, entry.time, constants)?)),
            None => None,
        };
        entries.push(json!({
            "index": entry.index,
            "time": summary_number(entry.time),
            "time_in_scenario_units": summary_number(entry.scenario_units),
            "curve_file": file,
            "enclosed_area": value_or_error(enclosed_area(&curve), summary_number),
            "fit": value_or_error(fit_ellipse(&curve), |fit| json!({
                "coefficients": ellipse_json(&fit.coeffs),
                "residual_rms": summary_number(fit.residual_rms),
            })),
            "closed_form": closed_form,
        }));
    }
    let mut summary = base_summary("curve", scenario, options);
    summary["reference_width"] = summary_number(reference_width);
    summary["entries"] = json!(entries);
    write_json(&options.path("curve_summary.json"), &summary)?;
    Ok(summary)
}

/// `evolve`: split-step propagation through the scenario's time list,
/// starting from the closed-form state at the first listed time, with
/// closed-form moments and distance diagnostics at every stop.
pub fn run_evolve(scenario: &Scenario, options: &RunOptions) -> Result<serde_json::Value> {
    options.prepare()?;
    let dt = scenario
        .propagation
        .as_ref()
        .ok_or_else(|| Error::Scenario("the evolve command requires propagation.dt".into()))?
        .dt;
    let entries = time_entries(scenario)?;
    let system = scenario.system_spec();
    let mut psi = scenario.state_at(entries[0].time)?;
    let mut now = entries[0].time;
    let mut rows = Vec::with_capacity(entries.len());
    for entry in &entries {
        let span = entry.time - now;
        if span != 0.0 {
            let steps = (span.abs() / dt).ceil().max(1.0) as usize;
            let plan = PropagationPlan::new(system, span / steps as f64, steps)?;
            psi = propagate(&psi, &plan)?;
            now = entry.time;
        }
        let exact = scenario.state_at(entry.time)?;
        rows.push(MomentsRow {
            time: entry.time,
            analytic: moments(&exact),
            oracle: moments(&psi),
            l2_distance: exact.l2_distance_up_to_phase(&psi)?,
            norm_drift: (psi.norm() - 1.0).abs(),
        });
    }
    write_moments_csv(&options.path("evolve_moments.csv"), &rows)?;
    let worst_l2 = rows.iter().map(|r| r.l2_distance).fold(0.0f64, f64::max);
    let worst_drift = rows.iter().map(|r| r.norm_drift).fold(0.0f64, f64::max);
    let mut summary = base_summary("evolve", scenario, options);
    summary["dt"] = summary_number(dt);
    summary["moments_file"] = json!("evolve_moments.csv");
    summary["worst_l2_distance"] = summary_number(worst_l2);
    summary["worst_norm_drift"] = summary_number(worst_drift);
    summary["entries"] = json!(entries
        .iter()
        .zip(&rows)
        .map(|(entry, row)| json!({
            "index": entry.index,
            "time": summary_number(entry.time),
            "time_in_scenario_units": summary_number(entry.scenario_units),
            "l2_distance": summary_number(row.l2_distance),
            "norm_drift": summary_number(row.norm_drift),
        }))
        .collect::<Vec<_>>());
    write_json(&options.path("evolve_summary.json"), &summary)?;
    Ok(summary)
}

/// `wigner`: per-time phase-space fields (CSV and binary), contour
/// polylines at the configured level fraction, and the Hausdorff
/// distance between the contour and the zero-level curve.
pub fn run_wigner(scenario: &Scenario, options: &RunOptions) -> Result<serde_json::Value> {
    options.prepare()?;
    let config = scenario.wigner.clone().unwrap_or_default();
    let mut entries = Vec::new();
    for entry in time_entries(scenario)? {
        let psi = scenario.state_at(entry.time)?;
        let field = wigner_transform(&psi, config.n_p)?;
        let csv_file = format!("wigner_field_{:02}.csv", entry.index);
        let bin_file = format!("wigner_field_{:02}.bin", entry.index);
        let contour_file = format!("wigner_contour_{:02}.csv", entry.index);
        write_field_csv(&options.path(&csv_file), &field)?;
        write_field_binary(&options.path(&bin_file), &field)?;
        let components = contour_components(&field, config.fraction)?;
        write_contour_csv(&options.path(&contour_file), &components)?;
        // Coincidence diagnostic: at the default 1/e fraction the contour
        // of a Gaussian state should trace the zero-level curve; other
        // fractions report the distance for what it is.
        let diagonal = field.cell_diagonal();
        let spacing = diagonal / 4.0;
        let mut level_points = Vec::new();
        for component in &components {
            level_points.extend(densify_polyline(component, false, spacing)?);
        }
        let mut curve_points = Vec::new();
        for loop_points in extract(&psi)?.real_branch_loops() {
            curve_points.extend(densify_polyline(&loop_points, true, spacing)?);
        }
        let distance = hausdorff_distance(&level_points, &curve_points)?;
        entries.push(json!({
            "index": entry.index,
            "time": summary_number(entry.time),
            "time_in_scenario_units": summary_number(entry.scenario_units),
            "field_csv": csv_file,
            "field_binary": bin_file,
            "contour_csv": contour_file,
            "contour_component_count": components.len(),
            "hausdorff_distance": summary_number(distance),
            "cell_diagonal": summary_number(diagonal),
            "distance_in_diagonals": summary_number(distance / diagonal),
        }));
    }
    let mut summary = base_summary("wigner", scenario, options);
    summary["n_p"] = json!(config.n_p);
    summary["contour_fraction"] = summary_number(config.fraction);
    summary["entries"] = json!(entries);
    write_json(&options.path("wigner_summary.json"), &summary)?;
    Ok(summary)
}

/// Sample-stream preview rows kept per campaign in the records CSV; the
/// estimates in the summary always use the full sample count, and the
/// full streams are reproducible from the recorded seeds.
const RECORD_PREVIEW_CAP: usize = 2048;

/// `measure`: per-time repeated-preparation campaigns (position,
/// momentum, and prism-screen records) with moment estimates, standard
/// errors, and the reconstructed conic; optionally a scattering-based
/// momentum-meter calibration block.
pub fn run_measure(scenario: &Scenario, options: &RunOptions) -> Result<serde_json::Value> {
    options.prepare()?;
    let measurement = scenario
        .measurement
        .as_ref()
        .ok_or_else(|| Error::Scenario("the measure command requires a measurement section".into()))?;
    let prism = PrismConstants::new(measurement.prism.c_lin, measurement.prism.d_quad)?;
    let constants = scenario.constants()?;
    let seed = options.effective_seed(scenario);
    let mut stream = seed;
    let mut entries = Vec::new();
    let mut preview_blocks: Vec<(String, &'static str, Vec<f64>)> = Vec::new();
    for entry in time_entries(scenario)? {
        let truth = moments(&scenario.state_at(entry.time)?);
        let time_seed = splitmix64(&mut stream);
        let record = estimate_moments(&truth, &prism, measurement.n_samples, time_seed)?;
        preview_blocks.extend(record_previews(
            &truth,
            &prism,
            measurement.n_samples,
            time_seed,
            entry.index,
        )?);
        entries.push(json!({
            "index": entry.index,
            "time": summary_number(entry.time),
            "time_in_scenario_units": summary_number(entry.scenario_units),
            "seed": time_seed,
            "true_moments": moments_json(&truth),
            "estimate": moments_json(&record.estimate),
            "standard_errors": standard_errors_json(&record),
            "ellipse": value_or_error(
                ellipse_from_moments(&record.estimate, constants.hbar),
                |coeffs| json!({
                    "coefficients": ellipse_json(&coeffs),
                    "enclosed_area": value_or_error(ellipse_area(&coeffs), summary_number),
                }),
            ),
        }));
    }
    write_measurement_csv(
        &options.path("measure_records.csv"),
        &preview_blocks
            .iter()
            .map(|(id, observable, values)| (id.as_str(), *observable, values.clone()))
            .collect::<Vec<_>>(),
    )?;
    let mut summary = base_summary("measure", scenario, options);
    summary["seed"] = json!(seed);
    summary["n_samples"] = json!(measurement.n_samples);
    summary["prism"] = json!({
        "c_lin": summary_number(prism.c_lin),
        "d_quad": summary_number(prism.d_quad),
    });
    summary["records_file"] = json!("measure_records.csv");
    summary["records_preview_cap"] = json!(RECORD_PREVIEW_CAP);
    summary["entries"] = json!(entries);
    if let Some(compton) = &measurement.compton {
        let config = ComptonConfig::new(
            compton.nu0,
            compton.phi,
            compton.mass,
            compton.speed_of_light,
            compton.planck_h,
        )?;
        let at_mean = compton_solve(&config, compton.beta0_mean)?;
        let linear = compton_linearize(&config, compton.beta0_mean, compton.beta0_halfwidth)?;
        summary["compton"] = json!({
            "nu0": summary_number(compton.nu0),
            "phi": summary_number(compton.phi),
            "beta0_mean": summary_number(compton.beta0_mean),
            "beta0_halfwidth": summary_number(compton.beta0_halfwidth),
            "nu_at_mean": summary_number(at_mean.nu),
            "beta_after": summary_number(at_mean.beta),
            "theta": summary_number(at_mean.theta),
            "worst_residual": summary_number(
                at_mean.residuals.iter().copied().fold(0.0f64, f64::max)
            ),
            "linearization": {
                "intercept": summary_number(linear.intercept),
                "slope": summary_number(linear.slope),
                "max_residual": summary_number(linear.max_residual),
            },
        });
    }
    write_json(&options.path("measure_summary.json"), &summary)?;
    Ok(summary)
}

fn standard_errors_json(record: &MeasurementRecord) -> serde_json::Value {
    json!({
        "mean_q": summary_number(record.std_errors.mean_q),
        "mean_p": summary_number(record.std_errors.mean_p),
        "var_q": summary_number(record.std_errors.var_q),
        "var_p": summary_number(record.std_errors.var_p),
        "correlation_k": summary_number(record.std_errors.correlation_k),
    })
}

/// Re-derive the three campaign streams exactly as the estimator does
/// (three sequential splitmix64 draws from the per-time seed) and return
/// capped previews of the drawn observables.
fn record_previews(
    truth: &Moments,
    prism: &PrismConstants,
    n: usize,
    time_seed: u64,
    time_index: usize,
) -> Result<Vec<(String, &'static str, Vec<f64>)>> {
    let preview = n.min(RECORD_PREVIEW_CAP);
    let mut stream = time_seed;
    let seed_q = splitmix64(&mut stream);
    let seed_p = splitmix64(&mut stream);
    let seed_screen = splitmix64(&mut stream);
    let positions: Vec<f64> = sample_gaussian_state(truth, preview, seed_q)?
        .into_iter()
        .map(|s| s.0)
        .collect();
    let momenta: Vec<f64> = sample_gaussian_state(truth, preview, seed_p)?
        .into_iter()
        .map(|s| s.1)
        .collect();
    let screens: Vec<f64> = sample_gaussian_state(truth, preview, seed_screen)?
        .into_iter()
        .map(|(q, p)| screen_position(q, p, prism))
        .collect();
    let id = format!("t{time_index:02}");
    Ok(vec![
        (id.clone(), "position", positions),
        (id.clone(), "momentum", momenta),
        (id, "screen", screens),
    ])
}

/// `reconstruct`: rebuild each state from its curve (anchored at the
/// density peak) and report the phase-aligned round-trip distance.
pub fn run_reconstruct(scenario: &Scenario, options: &RunOptions) -> Result<serde_json::Value> {
    options.prepare()?;
    let mut entries = Vec::new();
    for entry in time_entries(scenario)? {
        let psi = scenario.state_at(entry.time)?;
        let curve = extract(&psi)?;
        let anchor = ReconstructionAnchor::at_density_peak(&psi);
        let rebuilt = reconstruct_wavefunction(&curve, &anchor)?;
        let file = format!("reconstruct_{:02}.csv", entry.index);
        write_wavefunction_csv(&options.path(&file), &psi, rebuilt.amplitudes())?;
        entries.push(json!({
            "index": entry.index,
            "time": summary_number(entry.time),
            "time_in_scenario_units": summary_number(entry.scenario_units),
            "wavefunction_file": file,
            "anchor": {
                "q": summary_number(anchor.q),
                "rho": summary_number(anchor.rho),
                "drho": summary_number(anchor.drho),
            },
            "l2_distance_up_to_phase": summary_number(psi.l2_distance_up_to_phase(&rebuilt)?),
        }));
    }
    let mut summary = base_summary("reconstruct", scenario, options);
    summary["entries"] = json!(entries);
    write_json(&options.path("reconstruct_summary.json"), &summary)?;
    Ok(summary)
}

/// `verify`: run the criterion suite, print one line per criterion, and
/// write the JSON report. Returns whether everything passed.
pub fn run_verify(options: &RunOptions) -> Result<bool> {
    options.prepare()?;
    let reports = run_all(options.profile);
    for report in &reports {
        println!("{}", report.summary_line());
    }
    let passed = all_passed(&reports);
    let value = json!({
        "command": "verify",
        "profile": match options.profile {
            ToleranceProfile::Default => "default",
            ToleranceProfile::Strict => "strict",
        },
        "all_passed": passed,
        "criteria": reports
            .iter()
            .map(|r| json!({
                "id": r.id,
                "name": r.name,
                "passed": r.passed,
                "measured": summary_number(r.measured),
                "tolerance": summary_number(r.tolerance),
                "detail": r.detail,
                "runtime_seconds": summary_number(r.runtime_seconds),
            }))
            .collect::<Vec<_>>(),
    });
    write_json(&options.path("verify_report.json"), &value)?;
    Ok(passed)
}

/// Process exit code for a command outcome: 0 success, 1 invalid
/// input, 2 numerical failure, 3 verification failure (`Ok(false)`).
pub fn exit_code(outcome: &Result<bool>) -> u8 {
    match outcome {
        Ok(true) => 0,
        Ok(false) => 3,
        Err(error) if error.is_input_error() => 1,
        Err(_) => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{
        free_spreading_preset, superposition_preset, MeasurementConfig, PrismConfig,
    };

    #[test]
    fn exit_codes_separate_the_four_outcomes() {
        assert_eq!(exit_code(&Ok(true)), 0);
        assert_eq!(exit_code(&Ok(false)), 3);
        assert_eq!(exit_code(&Err(Error::Scenario("bad".into()))), 1);
        assert_eq!(exit_code(&Err(Error::NoRealBand)), 2);
    }

    fn options(dir: &tempfile::TempDir) -> RunOptions {
        RunOptions {
            out_dir: dir.path().to_path_buf(),
            dimensionless: false,
            seed_override: None,
            profile: ToleranceProfile::Default,
        }
    }

    fn small_free_scenario() -> Scenario {
        let mut scenario = free_spreading_preset();
        scenario.times.values = vec![0.0, 1.0];
        scenario
    }

    #[test]
    fn curve_run_writes_per_time_tables_and_a_summary() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_curve(&small_free_scenario(), &options(&dir)).unwrap();
        assert!(dir.path().join("curve_00.csv").exists());
        assert!(dir.path().join("curve_01.csv").exists());
        assert!(dir.path().join("curve_summary.json").exists());
        let entries = summary["entries"].as_array().unwrap();
        assert_eq!(entries.len(), 2);
        let area = entries[0]["enclosed_area"].as_f64().unwrap();
        assert!((area - std::f64::consts::PI).abs() < 1e-6);
        assert!(entries[1]["fit"]["coefficients"]["b"].as_f64().unwrap() > 1.9);
    }

    #[test]
    fn curve_runs_are_byte_identical_for_equal_seeds() {
        let scenario = small_free_scenario();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run_curve(&scenario, &options(&dir_a)).unwrap();
        run_curve(&scenario, &options(&dir_b)).unwrap();
        for name in ["curve_00.csv", "curve_summary.json"] {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn evolve_requires_a_propagation_section() {
        let mut scenario = small_free_scenario();
        scenario.propagation = None;
        let dir = tempfile::tempdir().unwrap();
        let err = run_evolve(&scenario, &options(&dir)).unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn evolve_tracks_the_closed_form() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_evolve(&small_free_scenario(), &options(&dir)).unwrap();
        assert!(summary["worst_l2_distance"].as_f64().unwrap() < 1e-6);
        assert!(summary["worst_norm_drift"].as_f64().unwrap() < 1e-10);
        assert!(dir.path().join("evolve_moments.csv").exists());
    }

    #[test]
    fn measure_uses_the_seed_override() {
        let mut scenario = small_free_scenario();
        scenario.times.values = vec![1.0];
        scenario.measurement = Some(MeasurementConfig {
            prism: PrismConfig { c_lin: 0.5, d_quad: 0.5 },
            n_samples: 4096,
            compton: None,
        });
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let base = options(&dir_a);
        let summary_a = run_measure(&scenario, &base).unwrap();
        let overridden = RunOptions { seed_override: Some(7), ..options(&dir_b) };
        let summary_b = run_measure(&scenario, &overridden).unwrap();
        assert_eq!(summary_a["seed"], json!(scenario.seed));
        assert_eq!(summary_b["seed"], json!(7));
        assert_ne!(
            summary_a["entries"][0]["estimate"]["var_q"],
            summary_b["entries"][0]["estimate"]["var_q"]
        );
        assert!(dir_a.path().join("measure_records.csv").exists());
    }

    #[test]
    fn reconstruct_round_trips_the_preset() {
        let mut scenario = small_free_scenario();
        scenario.times.values = vec![0.0];
        let dir = tempfile::tempdir().unwrap();
        let summary = run_reconstruct(&scenario, &options(&dir)).unwrap();
        let l2 = summary["entries"][0]["l2_distance_up_to_phase"].as_f64().unwrap();
        assert!(l2 < 1e-4, "round-trip distance {l2}");
    }

    #[test]
    fn superposition_curve_records_fit_errors_without_failing() {
        let mut scenario = superposition_preset();
        scenario.times.values = vec![0.0];
        let dir = tempfile::tempdir().unwrap();
        let summary = run_curve(&scenario, &options(&dir)).unwrap();
        let entry = &summary["entries"][0];
        // two disjoint lobes: the enclosed area exists, a single-conic
        // description may not; either a fit or an error must be recorded
        assert!(entry["enclosed_area"].as_f64().is_some());
        assert!(entry["fit"].is_object());
        assert!(entry["closed_form"].is_null());
    }
}
