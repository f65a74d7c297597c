//! Spectral and finite-difference differentiation on the uniform grid.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::Grid;

/// Forward FFT (unnormalized, `sum_j x_j e^{-2 pi i j k / n}`), in place.
pub(crate) fn fft_in_place(values: &mut [Complex64]) {
    let fft = FftPlanner::new().plan_fft_forward(values.len());
    fft.process(values);
}

/// Inverse FFT (unnormalized, `sum_k X_k e^{+2 pi i j k / n}`), in place.
pub(crate) fn ifft_in_place(values: &mut [Complex64]) {
    let fft = FftPlanner::new().plan_fft_inverse(values.len());
    fft.process(values);
}

/// `order`-th spectral derivative of a periodic sample set.
///
/// First derivatives zero the asymmetric Nyquist bin; even orders keep it
/// with the real factor `(-k^2)^(order/2)`.
pub fn spectral_derivative(grid: &Grid, values: &[Complex64], order: u32) -> Vec<Complex64> {
    assert_eq!(values.len(), grid.len(), "value count must match the grid");
    let n = grid.len();
    let mut spectrum = values.to_vec();
    fft_in_place(&mut spectrum);
    let k = grid.wavenumbers();
    for (j, coeff) in spectrum.iter_mut().enumerate() {
        let factor = match order % 2 {
            // i k, with the Nyquist bin dropped for odd orders
            1 if j == n / 2 => Complex64::new(0.0, 0.0),
            1 => Complex64::new(0.0, k[j]).powu(order),
            _ => Complex64::new(-(k[j] * k[j]), 0.0).powu(order / 2),
        };
        *coeff *= factor / n as f64;
    }
    ifft_in_place(&mut spectrum);
    spectrum
}

/// Spectral derivative of a real sample set; the imaginary residue is
/// discarded (it is at rounding level for real input).
pub fn spectral_derivative_real(grid: &Grid, values: &[f64], order: u32) -> Vec<f64> {
    let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spectral_derivative(grid, &complex, order)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// Clamp a 5-point stencil around `i` into `[0, n)` and return its start.
fn stencil_start(i: usize, n: usize) -> usize {
    debug_assert!(n >= 5);
    i.saturating_sub(2).min(n - 5)
}

/// 4th-order finite-difference first derivative at index `i`, shifting to
/// one-sided stencils near the array ends.
pub fn fd4_first<T>(values: &[T], i: usize, h: f64) -> T
where
    T: Copy
        + std::ops::Mul<f64, Output = T>
        + std::ops::Add<Output = T>,
{
    let s = stencil_start(i, values.len());
    let coeffs: [f64; 5] = match i as isize - s as isize {
        0 => [-25.0, 48.0, -36.0, 16.0, -3.0],
        1 => [-3.0, -10.0, 18.0, -6.0, 1.0],
        2 => [1.0, -8.0, 0.0, 8.0, -1.0],
        3 => [-1.0, 6.0, -18.0, 10.0, 3.0],
        _ => [3.0, -16.0, 36.0, -48.0, 25.0],
    };
    let mut acc = values[s] * (coeffs[0] / (12.0 * h));
    for (offset, &c) in coeffs.iter().enumerate().skip(1) {
        acc = acc + values[s + offset] * (c / (12.0 * h));
    }
    acc
}

/// 4th-order finite-difference second derivative at index `i`; uses the
/// 6-point one-sided stencils near the array ends.
pub fn fd4_second<T>(values: &[T], i: usize, h: f64) -> T
where
    T: Copy
        + std::ops::Mul<f64, Output = T>
        + std::ops::Add<Output = T>,
{
    let n = values.len();
    debug_assert!(n >= 6);
    let scale = 12.0 * h * h;
    let (s, coeffs): (usize, &[f64]) = if i >= 2 && i + 2 < n {
        (i - 2, &[-1.0, 16.0, -30.0, 16.0, -1.0])
    } else if i < 2 {
        match i {
            0 => (0, &[45.0, -154.0, 214.0, -156.0, 61.0, -10.0]),
            _ => (0, &[10.0, -15.0, -4.0, 14.0, -6.0, 1.0]),
        }
    } else {
        // within two points of the upper end: mirrored one-sided stencils
        let s = n - 6;
        match i - s {
            4 => (s, &[1.0, -6.0, 14.0, -4.0, -15.0, 10.0]),
            _ => (s, &[-10.0, 61.0, -156.0, 214.0, -154.0, 45.0]),
        }
    };
    let mut acc = values[s] * (coeffs[0] / scale);
    for (offset, &c) in coeffs.iter().enumerate().skip(1) {
        acc = acc + values[s + offset] * (c / scale);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spectral_derivative_of_gaussian_matches_closed_form() {
        let grid = Grid::new(-10.0, 10.0, 256).unwrap();
        let f: Vec<Complex64> = grid
            .positions()
            .iter()
            .map(|&q| Complex64::new((-q * q / 2.0).exp(), 0.0))
            .collect();
        let d1 = spectral_derivative(&grid, &f, 1);
        let d2 = spectral_derivative(&grid, &f, 2);
        for (j, &q) in grid.positions().iter().enumerate() {
            let g = (-q * q / 2.0).exp();
            assert_relative_eq!(d1[j].re, -q * g, epsilon = 1e-10);
            assert_relative_eq!(d2[j].re, (q * q - 1.0) * g, epsilon = 1e-9);
            assert!(d1[j].im.abs() < 1e-12);
        }
    }

    #[test]
    fn fd4_is_exact_on_quartics() {
        // 4th-order stencils differentiate polynomials up to x^4 exactly.
        let h = 0.1;
        let xs: Vec<f64> = (0..12).map(|i| i as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|&x| x.powi(4) - 2.0 * x.powi(3) + x).collect();
        for i in 0..xs.len() {
            let x = xs[i];
            let want_d1 = 4.0 * x.powi(3) - 6.0 * x * x + 1.0;
            let want_d2 = 12.0 * x * x - 12.0 * x;
            assert_relative_eq!(fd4_first(&f, i, h), want_d1, epsilon = 1e-9, max_relative = 1e-9);
            assert_relative_eq!(fd4_second(&f, i, h), want_d2, epsilon = 1e-8, max_relative = 1e-8);
        }
    }
}
