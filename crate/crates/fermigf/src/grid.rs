//! Uniform position grid with periodic (FFT) conventions.

use crate::error::{Error, Result};

/// Uniform grid of `n_points` positions `q_j = q_min + j*dq` with
/// `dq = (q_max - q_min)/n_points`; `q_max` itself is not a node, matching
/// the periodic convention used by the spectral transforms.
///
/// `n_points` must be a power of two and at least 16.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    q_min: f64,
    q_max: f64,
    n_points: usize,
}

impl Grid {
    pub const MIN_POINTS: usize = 16;
    pub const DEFAULT_POINTS: usize = 2048;

    pub fn new(q_min: f64, q_max: f64, n_points: usize) -> Result<Self> {
        if !(q_min.is_finite() && q_max.is_finite() && q_max > q_min) {
            return Err(Error::InvalidParameter(format!(
                "grid needs finite q_max > q_min, got [{q_min}, {q_max}]"
            )));
        }
        if n_points < Self::MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "n_points must be a power of two >= {}, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { q_min, q_max, n_points })
    }

    /// Default box `[-20 delta_ref, 20 delta_ref]` with 2048 points.
    pub fn default_for(delta_ref: f64) -> Result<Self> {
        if !(delta_ref.is_finite() && delta_ref > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta_ref must be positive, got {delta_ref}"
            )));
        }
        Self::new(-20.0 * delta_ref, 20.0 * delta_ref, Self::DEFAULT_POINTS)
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Box length `q_max - q_min`.
    pub fn length(&self) -> f64 {
        self.q_max - self.q_min
    }

    /// Grid spacing.
    pub fn dq(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn position(&self, j: usize) -> f64 {
        self.q_min + j as f64 * self.dq()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }

    /// Index of the grid node nearest to `q`, if `q` lies inside the box.
    pub fn nearest_index(&self, q: f64) -> Option<usize> {
        if q < self.q_min || q > self.q_max {
            return None;
        }
        let j = ((q - self.q_min) / self.dq()).round() as usize;
        Some(j.min(self.n_points - 1))
    }

    /// Angular wavenumbers `2*pi*m/L` in FFT bin order
    /// (`m = j` for `j < n/2`, `m = j - n` otherwise).
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let base = 2.0 * std::f64::consts::PI / self.length();
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as isize } else { j as isize - n as isize };
                m as f64 * base
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_sizes_and_bounds() {
        assert!(Grid::new(-1.0, 1.0, 12).is_err());
        assert!(Grid::new(-1.0, 1.0, 100).is_err());
        assert!(Grid::new(1.0, -1.0, 64).is_err());
        assert!(Grid::new(-1.0, 1.0, 64).is_ok());
    }

    #[test]
    fn default_box_is_forty_deltas_wide() {
        let g = Grid::default_for(0.5).unwrap();
        assert_relative_eq!(g.q_min(), -10.0);
        assert_relative_eq!(g.q_max(), 10.0);
        assert_eq!(g.len(), 2048);
    }

    #[test]
    fn spacing_and_positions_are_uniform() {
        let g = Grid::new(-20.0, 20.0, 2048).unwrap();
        assert_relative_eq!(g.dq(), 40.0 / 2048.0);
        let qs = g.positions();
        assert_relative_eq!(qs[0], -20.0);
        assert_relative_eq!(qs[1] - qs[0], g.dq(), epsilon = 1e-15);
        // q_max is not a node
        assert!(qs[g.len() - 1] < g.q_max());
    }

    #[test]
    fn wavenumbers_follow_fft_order() {
        let g = Grid::new(0.0, 1.0, 16).unwrap();
        let k = g.wavenumbers();
        let base = 2.0 * std::f64::consts::PI;
        assert_relative_eq!(k[0], 0.0);
        assert_relative_eq!(k[1], base);
        assert_relative_eq!(k[8], -8.0 * base);
        assert_relative_eq!(k[15], -base);
    }

    #[test]
    fn nearest_index_snaps_and_rejects_outside() {
        let g = Grid::new(-2.0, 2.0, 16).unwrap();
        assert_eq!(g.nearest_index(-2.0), Some(0));
        assert_eq!(g.nearest_index(0.01), Some(8));
        assert_eq!(g.nearest_index(5.0), None);
    }
}
