//! Polar discretization of the transverse-wavevector plane.
//!
//! Radial nodes are Gauss-Legendre points on `(0, q_max)`; the azimuthal
//! axis samples only the difference angle `phi_s - phi_i` uniformly on
//! `[0, 2 pi)`, since the two-photon amplitude depends on nothing else.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::params::{derive_wavenumbers, PdcParams};

pub const MIN_RADIAL_NODES: usize = 16;
pub const MIN_AZIMUTHAL_SAMPLES: usize = 8;

pub const DEFAULT_RADIAL_NODES: usize = 256;
pub const DEFAULT_AZIMUTHAL_SAMPLES: usize = 128;
/// Ceiling for automatic azimuthal refinement.
pub const MAX_AZIMUTHAL_SAMPLES: usize = 2048;

/// Multiple of the first sinc zero used as the default radial cutoff.
const CUTOFF_ZEROS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    q_nodes: Vec<f64>,
    q_weights: Vec<f64>,
    n_phi: usize,
    q_max: f64,
}

impl PolarGrid {
    pub fn q_nodes(&self) -> &[f64] {
        &self.q_nodes
    }

    pub fn q_weights(&self) -> &[f64] {
        &self.q_weights
    }

    pub fn n_q(&self) -> usize {
        self.q_nodes.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    /// Azimuthal spacing `2 pi / n_phi`.
    pub fn dphi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    /// The `j`-th azimuthal sample.
    pub fn phi(&self, j: usize) -> f64 {
        self.dphi() * j as f64
    }

    /// Largest azimuthal order resolvable on this grid (`n_phi >= 2 n_max + 2`).
    pub fn max_azimuthal_order(&self) -> usize {
        (self.n_phi - 2) / 2
    }

    /// Radial quadrature of `g(q)` against `dq`.
    pub fn integrate_dq(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.q_nodes
            .iter()
            .zip(&self.q_weights)
            .map(|(&q, &w)| w * g(q))
            .sum()
    }

    /// Radial quadrature of `g(q)` against `q dq`.
    pub fn integrate_qdq(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.integrate_dq(|q| q * g(q))
    }
}

pub fn build_grid(q_max: f64, n_q: usize, n_phi: usize) -> Result<PolarGrid> {
    if !(q_max.is_finite() && q_max > 0.0) {
        return Err(Error::InvalidGrid(format!("q_max must be positive, got {q_max}")));
    }
    if n_q < MIN_RADIAL_NODES {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_RADIAL_NODES} radial nodes, got {n_q}"
        )));
    }
    if n_phi < MIN_AZIMUTHAL_SAMPLES || n_phi % 2 != 0 {
        return Err(Error::InvalidGrid(format!(
            "azimuthal sample count must be even and >= {MIN_AZIMUTHAL_SAMPLES}, got {n_phi}"
        )));
    }

    let rule = GaussLegendre::new(NonZeroUsize::new(n_q).expect("n_q checked above"));
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * q_max * (x + 1.0), 0.5 * q_max * w))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (q_nodes, q_weights) = pairs.into_iter().unzip();

    Ok(PolarGrid {
        q_nodes,
        q_weights,
        n_phi,
        q_max,
    })
}

/// Internal angle of the first zero of `sinc(dk_z L / 2)` along `theta_s = theta_i`.
pub fn first_sinc_zero_angle(params: &PdcParams) -> Result<f64> {
    let wn = derive_wavenumbers(params)?;
    // 2 k0 (1 - cos theta) = 2 pi / L
    let one_minus_cos = PI / (wn.k0_crystal * params.crystal_length);
    if one_minus_cos >= 1.0 {
        return Err(Error::InvalidParameter {
            field: "crystal_length_L",
            reason: "crystal too short for a phase-matching zero".into(),
        });
    }
    Ok((1.0 - one_minus_cos).acos())
}

/// Radial cutoff covering the angular spectrum: `k0_air * theta_cut` with
/// `theta_cut` three times the external angle of the first sinc zero.
pub fn default_q_max(params: &PdcParams) -> Result<f64> {
    let wn = derive_wavenumbers(params)?;
    let theta_cut = CUTOFF_ZEROS * params.index_ratio() * first_sinc_zero_angle(params)?;
    Ok(wn.k0_air * theta_cut)
}
