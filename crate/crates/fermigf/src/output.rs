//! Data-file writers shared by the CLI commands.
//!
//! CSV cells carry full 17-significant-digit decimal floats so reruns
//! are byte-comparable; JSON summaries round to 12 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use num_complex::Complex64;

use crate::curve::FermiCurve;
use crate::error::Result;
use crate::state::WaveFunction;
use crate::wigner::PhaseSpaceField;

/// Full-precision decimal form (17 significant digits round-trips f64).
pub fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

/// Round to 12 significant digits for JSON summaries.
pub fn round_for_summary(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// `serde_json` number rounded for summary output.
pub fn summary_number(v: f64) -> serde_json::Value {
    serde_json::json!(round_for_summary(v))
}

fn writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Curve table: raw columns
/// `q, re_p_plus, im_p_plus, re_p_minus, im_p_minus, real_branch, valid`
/// followed by their dimensionless counterparts (`q/delta`, branch
/// values times `delta/hbar`); `dimensionless_first` swaps which block
/// leads.
pub fn write_curve_csv(
    path: &Path,
    curve: &FermiCurve,
    reference_width: f64,
    dimensionless_first: bool,
) -> Result<()> {
    let mut out = writer(path)?;
    let raw_header = "q,re_p_plus,im_p_plus,re_p_minus,im_p_minus";
    let scaled_header =
        "q_over_delta,re_p_plus_scaled,im_p_plus_scaled,re_p_minus_scaled,im_p_minus_scaled";
    if dimensionless_first {
        writeln!(out, "{scaled_header},{raw_header},real_branch,valid")?;
    } else {
        writeln!(out, "{raw_header},{scaled_header},real_branch,valid")?;
    }
    let momentum_scale = reference_width / curve.constants.hbar;
    for (j, &q) in curve.positions.iter().enumerate() {
        let (plus, minus) = (curve.p_plus[j], curve.p_minus[j]);
        let raw = [q, plus.re, plus.im, minus.re, minus.im];
        let scaled = [
            q / reference_width,
            plus.re * momentum_scale,
            plus.im * momentum_scale,
            minus.re * momentum_scale,
            minus.im * momentum_scale,
        ];
        let (first, second) = if dimensionless_first { (scaled, raw) } else { (raw, scaled) };
        let mut cells: Vec<String> =
            first.iter().chain(second.iter()).map(|v| full_precision(*v)).collect();
        cells.push(u8::from(curve.real_branch[j]).to_string());
        cells.push(u8::from(curve.valid[j]).to_string());
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// One labelled row group per time sample: analytic and oracle moments
/// side by side plus the distance diagnostics.
pub struct MomentsRow {
    pub time: f64,
    pub analytic: crate::state::Moments,
    pub oracle: crate::state::Moments,
    pub l2_distance: f64,
    pub norm_drift: f64,
}

pub fn write_moments_csv(path: &Path, rows: &[MomentsRow]) -> Result<()> {
    let mut out = writer(path)?;
    writeln!(
        out,
        "time,analytic_mean_q,analytic_mean_p,analytic_var_q,analytic_var_p,analytic_k,\
         oracle_mean_q,oracle_mean_p,oracle_var_q,oracle_var_p,oracle_k,\
         l2_distance,norm_drift"
    )?;
    for row in rows {
        let cells = [
            row.time,
            row.analytic.mean_q,
            row.analytic.mean_p,
            row.analytic.var_q,
            row.analytic.var_p,
            row.analytic.correlation_k,
            row.oracle.mean_q,
            row.oracle.mean_p,
            row.oracle.var_q,
            row.oracle.var_p,
            row.oracle.correlation_k,
            row.l2_distance,
            row.norm_drift,
        ];
        let line: Vec<String> = cells.iter().map(|v| full_precision(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Long-format field table `q, p, value`.
pub fn write_field_csv(path: &Path, field: &PhaseSpaceField) -> Result<()> {
    let mut out = writer(path)?;
    writeln!(out, "q,p,value")?;
    for (iq, &q) in field.q_values.iter().enumerate() {
        for (ip, &p) in field.p_values.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                full_precision(q),
                full_precision(p),
                full_precision(field.value(iq, ip))
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Compact binary field: header `n_q, n_p` (u64 little-endian) and
/// `q_min, q_max, p_min, p_max` (f64 little-endian), then the values
/// row-major (position-major) as f64 little-endian.
pub fn write_field_binary(path: &Path, field: &PhaseSpaceField) -> Result<()> {
    let mut out = writer(path)?;
    out.write_all(&(field.n_q() as u64).to_le_bytes())?;
    out.write_all(&(field.n_p() as u64).to_le_bytes())?;
    for bound in [
        field.q_values[0],
        *field.q_values.last().unwrap(),
        field.p_values[0],
        *field.p_values.last().unwrap(),
    ] {
        out.write_all(&bound.to_le_bytes())?;
    }
    for v in &field.values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Contour polylines: `component, q, p`, points ordered along each
/// connected component.
pub fn write_contour_csv(path: &Path, components: &[Vec<(f64, f64)>]) -> Result<()> {
    let mut out = writer(path)?;
    writeln!(out, "component,q,p")?;
    for (index, component) in components.iter().enumerate() {
        for &(q, p) in component {
            writeln!(out, "{index},{},{}", full_precision(q), full_precision(p))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Per-sample measurement records: `experiment_id, sample_index,
/// observable, value`.
pub fn write_measurement_csv(
    path: &Path,
    experiments: &[(&str, &str, Vec<f64>)],
) -> Result<()> {
    let mut out = writer(path)?;
    writeln!(out, "experiment_id,sample_index,observable,value")?;
    for (experiment_id, observable, values) in experiments {
        for (index, value) in values.iter().enumerate() {
            writeln!(out, "{experiment_id},{index},{observable},{}", full_precision(*value))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reconstructed wave function next to its reference.
pub fn write_wavefunction_csv(
    path: &Path,
    reference: &WaveFunction,
    reconstructed: &[Complex64],
) -> Result<()> {
    let mut out = writer(path)?;
    writeln!(out, "q,re_reference,im_reference,re_reconstructed,im_reconstructed")?;
    let grid = reference.grid();
    for (j, amp) in reference.amplitudes().iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            full_precision(grid.position(j)),
            full_precision(amp.re),
            full_precision(amp.im),
            full_precision(reconstructed[j].re),
            full_precision(reconstructed[j].im)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut out = writer(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_precision_round_trips_f64() {
        for v in [0.1, -3.5e-300, std::f64::consts::PI, 1.0 / 3.0, 2.0f64.powi(-52)] {
            assert_eq!(full_precision(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn summary_rounding_keeps_twelve_significant_digits() {
        assert_eq!(round_for_summary(std::f64::consts::PI), 3.14159265359);
        assert_eq!(round_for_summary(0.0), 0.0);
        assert_eq!(round_for_summary(-1.23456789012345e-7), -1.23456789012e-7);
    }

    #[test]
    fn binary_field_layout_is_stable() {
        let field = PhaseSpaceField {
            q_values: vec![0.0, 1.0],
            p_values: vec![-2.0, 2.0],
            values: vec![1.0, 2.0, 3.0, 4.0],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        write_field_binary(&path, &field).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 16 + 32 + 32);
        assert_eq!(u64::from_le_bytes(bytes[0..8].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        let q_min = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
        assert_eq!(q_min, 0.0);
        let last = f64::from_le_bytes(bytes[72..80].try_into().unwrap());
        assert_eq!(last, 4.0);
    }
}
