//! Spatial Schmidt modes of high-gain parametric down-conversion from a
//! two-crystal source, and their projective filtering by a Gaussian fiber
//! eigenmode.
//!
//! The pipeline is
//!
//! 1. [`params`]: physical constants and derived wavenumbers,
//! 2. [`grid`]: polar quadrature grid over transverse wavevectors,
//! 3. [`tpa`]: the two-photon amplitude,
//! 4. [`schmidt`]: azimuthal harmonics and per-order SVD,
//! 5. [`gain`]: high-gain renormalization of the eigenvalues,
//! 6. [`fiber`]: fiber projections, coupling efficiency, intrinsic loss,
//! 7. [`correlations`]: g2 of the filtered field.

pub mod correlations;
pub mod error;
pub mod fiber;
pub mod gain;
pub mod grid;
pub mod params;
pub mod schmidt;
pub mod tpa;

pub use error::{Error, Result};
pub use fiber::{CouplingReport, FiberMode, LossEstimate};
pub use gain::GainSpectrum;
pub use grid::PolarGrid;
pub use params::{PdcParams, WaveNumbers};
pub use schmidt::{AzimuthalBlocks, SchmidtDecomposition, SchmidtMode};
pub use tpa::{DoubleGauss, TpaField};
