//! High-gain renormalization of the Schmidt spectrum.
//!
//! Each Schmidt pair evolves under a two-mode squeezing transformation
//! with `c_k = cosh(G sqrt(lambda_k))`, `s_k = sinh(G sqrt(lambda_k))`, and
//! carries `N_k = s_k^2` photons.

use crate::error::{Error, Result};
use crate::schmidt::{schmidt_number, SchmidtDecomposition};

/// Largest `G sqrt(lambda)` for which `cosh`/`sinh` stay finite with margin.
pub const MAX_SQUEEZING: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GainMode {
    pub m: usize,
    pub n: i32,
    pub lambda: f64,
    pub c: f64,
    pub s: f64,
    pub photons: f64,
    pub lambda_prime: f64,
}

/// Per-mode Bogolyubov coefficients and renormalized eigenvalues, aligned
/// index by index with the modes of the source decomposition.
#[derive(Debug, Clone)]
pub struct GainSpectrum {
    pub gain: f64,
    pub modes: Vec<GainMode>,
    pub total_photons: f64,
    pub k_prime: f64,
}

impl GainSpectrum {
    pub fn lambda_prime(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda_prime).collect()
    }

    pub fn mode(&self, m: usize, n: i32) -> Option<&GainMode> {
        self.modes.iter().find(|x| x.m == m && x.n == n)
    }

    /// `lambda'` of the (0, 0) mode.
    pub fn first_lambda_prime(&self) -> Option<f64> {
        self.mode(0, 0).map(|x| x.lambda_prime)
    }
}

/// `lambda'_k = sinh^2(G sqrt(lambda_k)) / sum_j sinh^2(G sqrt(lambda_j))`.
///
/// Evaluated as ratios against the largest mode,
/// `sinh^2 x_k / sinh^2 x_0 = e^{2(x_k - x_0)} (expm1(-2 x_k) / expm1(-2 x_0))^2`,
/// which never overflows and keeps full precision at small gain. At `G = 0`
/// the small-gain limit `lambda' = lambda / sum lambda` is returned.
pub fn renormalize_eigenvalues(eigenvalues: &[f64], gain: f64) -> Vec<f64> {
    let x: Vec<f64> = eigenvalues.iter().map(|&l| gain * l.max(0.0).sqrt()).collect();
    let x0 = x.iter().copied().fold(0.0, f64::max);
    let ratios: Vec<f64> = if x0 > 0.0 {
        let d0 = (-2.0 * x0).exp_m1();
        x.iter()
            .map(|&xk| {
                let r = (-2.0 * xk).exp_m1() / d0;
                (2.0 * (xk - x0)).exp() * r * r
            })
            .collect()
    } else {
        eigenvalues.iter().map(|&l| l.max(0.0)).collect()
    };
    let total: f64 = ratios.iter().sum();
    if total > 0.0 {
        ratios.iter().map(|r| r / total).collect()
    } else {
        ratios
    }
}

pub fn apply_gain(dec: &SchmidtDecomposition, gain: f64) -> Result<GainSpectrum> {
    if !(gain.is_finite() && gain >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "gain_G",
            reason: format!("gain must be >= 0, got {gain}"),
        });
    }
    let lambdas = dec.eigenvalues();
    if lambdas.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let x_max = lambdas
        .iter()
        .map(|&l| gain * l.sqrt())
        .fold(0.0, f64::max);
    if x_max > MAX_SQUEEZING {
        return Err(Error::GainOverflow(x_max));
    }

    let lambda_prime = renormalize_eigenvalues(&lambdas, gain);
    let modes: Vec<GainMode> = dec
        .modes()
        .iter()
        .zip(&lambda_prime)
        .map(|(mode, &lp)| {
            let x = gain * mode.lambda.sqrt();
            let s = x.sinh();
            GainMode {
                m: mode.m,
                n: mode.n,
                lambda: mode.lambda,
                c: x.cosh(),
                s,
                photons: s * s,
                lambda_prime: lp,
            }
        })
        .collect();
    let total_photons = modes.iter().map(|m| m.photons).sum();
    let k_prime = schmidt_number(&lambda_prime)?;
    Ok(GainSpectrum {
        gain,
        modes,
        total_photons,
        k_prime,
    })
}

/// Effective mode number of a thermal multimode field from its
/// autocorrelation, `K' = 1 / (g2 - 1)`.
pub fn effective_modes_from_g2(g2: f64) -> Result<f64> {
    if !(g2.is_finite() && g2 > 1.0) {
        return Err(Error::NonThermalG2(g2));
    }
    Ok(1.0 / (g2 - 1.0))
}
