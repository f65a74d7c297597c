//! Phase-space representation of 1D quantum wave packets through the
//! Fermi g_F function.
//!
//! The zero set of `g_F(q, p) = [p - hbar theta'(q)]^2 + hbar^2 rho''(q)/rho(q)`
//! (with `psi = rho e^{i theta}`) is a curve in phase space that encodes a
//! pure state up to a global phase. This crate extracts that curve from
//! sampled wave functions, provides closed-form Gaussian dynamics (free,
//! uniform force, harmonic) with their exact ellipse coefficients and
//! moments, cross-checks everything against a split-step spectral
//! propagator and the Wigner distribution, simulates a prism-microscope
//! moment measurement, and reconstructs wave functions back from curve
//! data.
//!
//! Most entry points are plain functions over a [`state::WaveFunction`]:
//!
//! ```
//! use fermigf::grid::Grid;
//! use fermigf::state::{gaussian_packet, GaussianParams, PhysicalConstants};
//! use fermigf::curve::{enclosed_area, fermi_branches, DerivativeScheme};
//! use fermigf::polar::DEFAULT_RHO_FLOOR_FRACTION;
//!
//! let grid = Grid::new(-20.0, 20.0, 2048)?;
//! let psi = gaussian_packet(
//!     &grid,
//!     PhysicalConstants::default(),
//!     &GaussianParams::new(0.0, 2.0, 1.0)?,
//! )?;
//! let curve = fermi_branches(&psi, DerivativeScheme::Spectral, DEFAULT_RHO_FLOOR_FRACTION)?;
//! let area = enclosed_area(&curve)?;
//! assert!((area - std::f64::consts::PI).abs() < 1e-4);
//! # Ok::<(), fermigf::error::Error>(())
//! ```

pub mod curve;
pub mod deriv;
pub mod dynamics;
pub mod ellipse;
pub mod error;
pub mod grid;
pub mod measure;
pub mod output;
pub mod polar;
pub mod propagate;
pub mod runner;
pub mod scenario;
pub mod state;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
