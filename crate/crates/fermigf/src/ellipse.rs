//! Centered conic fits of the real curve, ellipse areas, and the
//! equivalent ellipse built from second moments.
//!
//! For a Gaussian state the real branch closes an ellipse
//! `a (q - qc)^2 + b (p - pc)^2 + 2 c (q - qc)(p - pc) = 1` with
//! `a b - c^2 = 1/hbar^2`, so its area is always `pi hbar`.

use crate::curve::FermiCurve;
use crate::error::{Error, Result};
use crate::state::Moments;

/// Minimum number of real-band grid points for a meaningful conic fit.
pub const MIN_FIT_POINTS: usize = 8;

/// Centered quadratic form `a q^2 + b p^2 + 2 c q p = 1` around
/// `(center_q, center_p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub center_q: f64,
    pub center_p: f64,
}

impl EllipseCoeffs {
    /// `a b - c^2`, positive for a genuine ellipse.
    pub fn determinant(&self) -> f64 {
        self.a * self.b - self.c * self.c
    }

    /// Evaluate the centered form minus one at a point (zero on the curve).
    pub fn evaluate(&self, q: f64, p: f64) -> f64 {
        let x = q - self.center_q;
        let y = p - self.center_p;
        self.a * x * x + self.b * y * y + 2.0 * self.c * x * y - 1.0
    }
}

/// A fitted ellipse together with the fit quality.
#[derive(Debug, Clone, Copy)]
pub struct EllipseFit {
    pub coeffs: EllipseCoeffs,
    /// Root-mean-square of the centered form over the data points.
    pub residual_rms: f64,
}

/// Area `pi / sqrt(a b - c^2)` of the ellipse.
pub fn ellipse_area(coeffs: &EllipseCoeffs) -> Result<f64> {
    let det = coeffs.determinant();
    if !(det > 0.0) {
        return Err(Error::DegenerateConic(det));
    }
    Ok(std::f64::consts::PI / det.sqrt())
}

/// Least-squares conic through the real branch of the curve.
///
/// Requires a single real band with at least [`MIN_FIT_POINTS`] points. A
/// crude center (band-extreme midpoint, mean of the branch average) shifts
/// the data; a five-parameter linear fit then refines both the quadratic
/// form and the center.
pub fn fit_ellipse(curve: &FermiCurve) -> Result<EllipseFit> {
    let bands = curve.real_bands();
    let bands: Vec<(usize, usize)> = bands
        .into_iter()
        .filter(|&(s, e)| e - s >= 2)
        .collect();
    if bands.is_empty() {
        return Err(Error::NoRealBand);
    }
    if bands.len() > 1 {
        return Err(Error::InvalidParameter(format!(
            "conic fit needs a single real band, found {}",
            bands.len()
        )));
    }
    let (start, end) = bands[0];
    if end - start < MIN_FIT_POINTS {
        return Err(Error::BandTooShort { got: end - start, needed: MIN_FIT_POINTS });
    }
    let mut points = Vec::with_capacity(2 * (end - start));
    let mut grad_sum = 0.0;
    for j in start..end {
        points.push((curve.positions[j], curve.p_plus[j].re));
        points.push((curve.positions[j], curve.p_minus[j].re));
        grad_sum += curve.phase_gradient[j];
    }
    let crude_q = 0.5 * (curve.positions[start] + curve.positions[end - 1]);
    let crude_p = grad_sum / (end - start) as f64;
    fit_ellipse_points(&points, (crude_q, crude_p))
}

/// Five-parameter conic fit of phase-space points around a crude center.
pub(crate) fn fit_ellipse_points(
    points: &[(f64, f64)],
    crude_center: (f64, f64),
) -> Result<EllipseFit> {
    let m = points.len();
    // scale the shifted coordinates to unit RMS for conditioning
    let (mut sq, mut sp) = (0.0, 0.0);
    for &(q, p) in points {
        sq += (q - crude_center.0) * (q - crude_center.0);
        sp += (p - crude_center.1) * (p - crude_center.1);
    }
    let sq = (sq / m as f64).sqrt().max(f64::MIN_POSITIVE);
    let sp = (sp / m as f64).sqrt().max(f64::MIN_POSITIVE);

    let n = 5;
    let mut design = vec![0.0; m * n];
    let mut rhs = vec![1.0; m];
    for (i, &(q, p)) in points.iter().enumerate() {
        let x = (q - crude_center.0) / sq;
        let y = (p - crude_center.1) / sp;
        design[i * n] = x * x;
        design[i * n + 1] = y * y;
        design[i * n + 2] = 2.0 * x * y;
        design[i * n + 3] = x;
        design[i * n + 4] = y;
    }
    let sol = least_squares(&mut design, &mut rhs, m, n);
    let (a0, b0, c0, d0, e0) = (
        sol[0] / (sq * sq),
        sol[1] / (sp * sp),
        sol[2] / (sq * sp),
        sol[3] / sq,
        sol[4] / sp,
    );

    // recentre where the gradient of the quadratic form vanishes
    let det = a0 * b0 - c0 * c0;
    if !(det.abs() > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateConic(det));
    }
    let dq = (-d0 / 2.0 * b0 + e0 / 2.0 * c0) / det;
    let dp = (-e0 / 2.0 * a0 + d0 / 2.0 * c0) / det;
    let constant = 1.0 - 0.5 * (d0 * dq + e0 * dp);
    if !(constant > 0.0) {
        return Err(Error::DegenerateConic(det));
    }
    let coeffs = EllipseCoeffs {
        a: a0 / constant,
        b: b0 / constant,
        c: c0 / constant,
        center_q: crude_center.0 + dq,
        center_p: crude_center.1 + dp,
    };
    if !(coeffs.determinant() > 0.0) {
        return Err(Error::DegenerateConic(coeffs.determinant()));
    }
    let mut sum_sq = 0.0;
    for &(q, p) in points {
        let r = coeffs.evaluate(q, p);
        sum_sq += r * r;
    }
    Ok(EllipseFit { coeffs, residual_rms: (sum_sq / m as f64).sqrt() })
}

/// Equivalent ellipse of a state from its first and second moments.
///
/// `a = 2 var_p / hbar^2`, `b = 2 var_q / hbar^2`, `c = -2 K / hbar^2`,
/// centered on the means. The moments must satisfy the uncertainty
/// relation `var_q var_p - K^2 >= hbar^2/4` (up to a 1e-6 slack).
pub fn ellipse_from_moments(moments: &Moments, hbar: f64) -> Result<EllipseCoeffs> {
    if !(hbar > 0.0) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    let lhs = moments.uncertainty_lhs();
    let bound = hbar * hbar / 4.0;
    if lhs < bound * (1.0 - 1e-6) {
        return Err(Error::UncertaintyViolation(lhs));
    }
    let h2 = hbar * hbar;
    Ok(EllipseCoeffs {
        a: 2.0 * moments.var_p / h2,
        b: 2.0 * moments.var_q / h2,
        c: -2.0 * moments.correlation_k / h2,
        center_q: moments.mean_q,
        center_p: moments.mean_p,
    })
}

/// Solve `min ||A x - b||` by Householder QR (`A` is `m x n` row-major,
/// `m >= n`); `a` and `b` are overwritten with the factorization.
fn least_squares(a: &mut [f64], b: &mut [f64], m: usize, n: usize) -> Vec<f64> {
    debug_assert!(m >= n);
    for k in 0..n {
        let norm = (k..m).map(|i| a[i * n + k] * a[i * n + k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k * n + k] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m - k];
        v[0] = a[k * n + k] - alpha;
        for i in k + 1..m {
            v[i - k] = a[i * n + k];
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        a[k * n + k] = alpha;
        for i in k + 1..m {
            a[i * n + k] = 0.0;
        }
        for j in k + 1..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[i * n + j]).sum();
            let f = 2.0 * dot / vtv;
            for i in k..m {
                a[i * n + j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dot / vtv;
        for i in k..m {
            b[i] -= f * v[i - k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k * n + j] * x[j];
        }
        x[k] = s / a[k * n + k];
    }
    x
}
