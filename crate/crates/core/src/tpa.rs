//! Two-photon amplitude on a polar grid.
//!
//! Two models are provided: the two-crystal amplitude (Gaussian pump,
//! sinc phase matching, interference through the air gap and the
//! associated propagation phase) and the separable double-Gauss kernel
//! whose Schmidt decomposition is known in closed form.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gain::renormalize_eigenvalues;
use crate::grid::PolarGrid;
use crate::params::{derive_wavenumbers, PdcParams, WaveNumbers};

/// `F(q_s, q_i, dphi)` sampled on a [`PolarGrid`], normalized so that
/// `sum w_s w_i q_s q_i |F|^2 dphi = 1`.
#[derive(Debug, Clone)]
pub struct TpaField {
    values: Vec<Complex64>,
    grid: PolarGrid,
    norm: f64,
}

impl TpaField {
    /// Samples `f(q_s, q_i, dphi)` on the grid and normalizes the result.
    pub fn from_fn<F>(grid: &PolarGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64, f64) -> Complex64 + Sync,
    {
        let n_q = grid.n_q();
        let n_phi = grid.n_phi();
        let q = grid.q_nodes();
        let mut values = vec![Complex64::new(0.0, 0.0); n_q * n_q * n_phi];
        values
            .par_chunks_mut(n_q * n_phi)
            .enumerate()
            .for_each(|(i, row)| {
                for j in 0..n_q {
                    for k in 0..n_phi {
                        row[j * n_phi + k] = f(q[i], q[j], grid.phi(k));
                    }
                }
            });
        Self::normalized(values, grid.clone())
    }

    fn normalized(mut values: Vec<Complex64>, grid: PolarGrid) -> Result<Self> {
        let norm = weighted_norm_sq(&values, &grid).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidGrid(
                "two-photon amplitude vanishes on the grid".into(),
            ));
        }
        let inv = 1.0 / norm;
        values.iter_mut().for_each(|v| *v *= inv);
        Ok(Self { values, grid, norm })
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    /// The factor removed during normalization.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.grid.n_q() + j) * self.grid.n_phi() + k
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[self.index(i, j, k)]
    }

    /// `sum w_s w_i q_s q_i |F|^2 dphi`; equals one after construction.
    pub fn weighted_norm_sq(&self) -> f64 {
        weighted_norm_sq(&self.values, &self.grid)
    }
}

fn weighted_norm_sq(values: &[Complex64], grid: &PolarGrid) -> f64 {
    let n_q = grid.n_q();
    let n_phi = grid.n_phi();
    let q = grid.q_nodes();
    let w = grid.q_weights();
    let mut total = 0.0;
    for i in 0..n_q {
        for j in 0..n_q {
            let base = (i * n_q + j) * n_phi;
            let s: f64 = values[base..base + n_phi].iter().map(|v| v.norm_sqr()).sum();
            total += w[i] * w[j] * q[i] * q[j] * s;
        }
    }
    total * grid.dphi()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `1 - cos(theta)` without cancellation.
fn versine(theta: f64) -> f64 {
    let h = (0.5 * theta).sin();
    2.0 * h * h
}

/// Longitudinal mismatch inside each crystal, `k_p - k_0 (cos theta_s + cos theta_i)`.
///
/// The detuning enters through `k_p`, so the on-axis value is the offset.
pub fn mismatch_crystal(theta_s: f64, theta_i: f64, wn: &WaveNumbers) -> f64 {
    wn.axial_mismatch() + wn.k0_crystal * (versine(theta_s) + versine(theta_i))
}

/// Longitudinal mismatch in the gap, `k_p^air - k_0^air (cos Theta_s + cos Theta_i)`
/// with the refracted angles `Theta = (n0 / n0_air) theta`.
pub fn mismatch_gap(theta_s: f64, theta_i: f64, wn: &WaveNumbers, params: &PdcParams) -> f64 {
    let r = params.index_ratio();
    wn.axial_gap_mismatch() + wn.k0_air * (versine(r * theta_s) + versine(r * theta_i))
}

/// Everything in the two-crystal amplitude except the pump envelope.
pub fn two_crystal_radial_factor(
    theta_s: f64,
    theta_i: f64,
    wn: &WaveNumbers,
    params: &PdcParams,
) -> Complex64 {
    let dk = mismatch_crystal(theta_s, theta_i, wn);
    let dk_gap = mismatch_gap(theta_s, theta_i, wn, params);
    let big_l = params.crystal_length;
    let small_l = params.gap_length;
    let amplitude = sinc(0.5 * dk * big_l) * (0.5 * (dk * big_l + dk_gap * small_l)).cos();
    let phase = -(dk * big_l + 0.5 * dk_gap * small_l);
    Complex64::from_polar(amplitude, phase)
}

/// Exponent coefficient `a^2 k_0^2 / (8 ln 2)` of the pump envelope.
pub fn pump_envelope_coefficient(params: &PdcParams, wn: &WaveNumbers) -> f64 {
    let a = params.pump_fwhm;
    a * a * wn.k0_crystal * wn.k0_crystal / (8.0 * LN_2)
}

/// Internal propagation angle of a transverse wavevector, `arcsin(q / k0)`.
pub fn internal_angle(q: f64, wn: &WaveNumbers) -> Result<f64> {
    if q >= wn.k0_crystal {
        return Err(Error::WavevectorOutOfRange {
            q,
            k0: wn.k0_crystal,
        });
    }
    Ok((q / wn.k0_crystal).asin())
}

pub fn tpa_two_crystal(grid: &PolarGrid, params: &PdcParams) -> Result<TpaField> {
    let wn = derive_wavenumbers(params)?;
    let theta: Vec<f64> = grid
        .q_nodes()
        .iter()
        .map(|&q| internal_angle(q, &wn))
        .collect::<Result<_>>()?;
    let beta = pump_envelope_coefficient(params, &wn);

    let n_q = grid.n_q();
    let n_phi = grid.n_phi();
    let cos_phi: Vec<f64> = (0..n_phi).map(|k| grid.phi(k).cos()).collect();
    let mut values = vec![Complex64::new(0.0, 0.0); n_q * n_q * n_phi];
    values
        .par_chunks_mut(n_q * n_phi)
        .enumerate()
        .for_each(|(i, row)| {
            let ts = theta[i];
            for (j, &ti) in theta.iter().enumerate() {
                let radial = two_crystal_radial_factor(ts, ti, &wn, params);
                let base = -beta * (ts * ts + ti * ti);
                let cross = -2.0 * beta * ts * ti;
                for (k, &c) in cos_phi.iter().enumerate() {
                    row[j * n_phi + k] = radial * (base + cross * c).exp();
                }
            }
        });
    TpaField::normalized(values, grid.clone())
}

/// Double-Gauss kernel `exp(-|q_s + q_i|^2 / 2 sigma_+^2) exp(-|q_s - q_i|^2 / 2 sigma_-^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleGauss {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
}

impl DoubleGauss {
    pub fn new(sigma_plus: f64, sigma_minus: f64) -> Result<Self> {
        for (field, v) in [("sigma_plus", sigma_plus), ("sigma_minus", sigma_minus)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("width must be positive, got {v}"),
                });
            }
        }
        Ok(Self {
            sigma_plus,
            sigma_minus,
        })
    }

    /// Kernel whose eigenvalues decay as `mu^(2m+|n|)` and whose first
    /// Schmidt mode is the Gaussian `exp(-q^2 / 2 w0^2)`.
    ///
    /// With `t = sqrt(mu)`: `sigma_+^2 = 2 w0^2 (1+t)/(1-t)`, `sigma_-^2 = 2 w0^2 (1-t)/(1+t)`.
    pub fn from_eigenvalue_ratio(mu: f64, w0: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::InvalidParameter {
                field: "mu",
                reason: format!("eigenvalue ratio must lie in [0, 1), got {mu}"),
            });
        }
        let t = mu.sqrt();
        Self::new(
            w0 * (2.0 * (1.0 + t) / (1.0 - t)).sqrt(),
            w0 * (2.0 * (1.0 - t) / (1.0 + t)).sqrt(),
        )
    }

    /// Decay constant `mu = ((sigma_+ - sigma_-) / (sigma_+ + sigma_-))^2`.
    pub fn eigenvalue_ratio(&self) -> f64 {
        let t = (self.sigma_plus - self.sigma_minus) / (self.sigma_plus + self.sigma_minus);
        t * t
    }

    /// Waist `w0` of the Gaussian first Schmidt mode.
    pub fn first_mode_waist(&self) -> f64 {
        (0.5 * self.sigma_plus * self.sigma_minus).sqrt()
    }

    /// Closed-form eigenvalue `(1 - mu)^2 mu^(2m + |n|)`.
    pub fn eigenvalue(&self, m: usize, n: i32) -> f64 {
        let mu = self.eigenvalue_ratio();
        (1.0 - mu).powi(2) * mu.powi(2 * m as i32 + n.abs())
    }

    /// Closed-form spectrum down to `floor`, one entry per (m, n) mode.
    pub fn spectrum(&self, floor: f64) -> Vec<f64> {
        analytic_spectrum(self.eigenvalue_ratio(), floor)
    }

    /// Radial cutoff enclosing every Laguerre-Gauss mode with eigenvalue above `floor`.
    pub fn suggested_q_max(&self, floor: f64) -> f64 {
        let mu = self.eigenvalue_ratio();
        let order = if mu > 0.0 {
            ((floor / (1.0 - mu).powi(2)).ln() / mu.ln()).max(0.0)
        } else {
            0.0
        };
        // outermost lobe of LG_{p,l} sits near sqrt(2p + |l| + 1) w0
        self.first_mode_waist() * (1.6 * (2.0 * order + 1.0).sqrt() + 4.0)
    }

    pub fn field(&self, grid: &PolarGrid) -> Result<TpaField> {
        tpa_double_gauss(grid, self.sigma_plus, self.sigma_minus)
    }

    /// Double-Gauss kernel whose high-gain mode number at `gain` equals `k_prime`.
    pub fn for_effective_modes(k_prime: f64, gain: f64, w0: f64) -> Result<Self> {
        let mu = ratio_for_effective_modes(k_prime, gain)?;
        Self::from_eigenvalue_ratio(mu, w0)
    }
}

/// Distinct eigenvalue levels `(1 - mu)^2 mu^N` down to `floor`, each with
/// its degeneracy `N + 1`.
fn analytic_levels(mu: f64, floor: f64) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let mut level = (1.0 - mu).powi(2);
    let mut order = 0usize;
    while level >= floor && order < 1_000_000 {
        out.push((level, order + 1));
        if mu == 0.0 {
            break;
        }
        level *= mu;
        order += 1;
    }
    out
}

fn analytic_spectrum(mu: f64, floor: f64) -> Vec<f64> {
    analytic_levels(mu, floor)
        .into_iter()
        .flat_map(|(level, deg)| std::iter::repeat(level).take(deg))
        .collect()
}

/// `K'` of the closed-form double-Gauss spectrum at gain `G`.
pub fn double_gauss_effective_modes(mu: f64, gain: f64) -> f64 {
    let levels = analytic_levels(mu, 1e-18);
    let values: Vec<f64> = levels.iter().map(|l| l.0).collect();
    // renormalize per level, then weight by multiplicity
    let per_level = renormalize_eigenvalues(&values, gain);
    let total: f64 = per_level.iter().zip(&levels).map(|(p, l)| p * l.1 as f64).sum();
    let sum_sq: f64 = per_level
        .iter()
        .zip(&levels)
        .map(|(p, l)| (p / total).powi(2) * l.1 as f64)
        .sum();
    1.0 / sum_sq
}

/// Solves `K'(mu, G) = k_prime` for the double-Gauss eigenvalue ratio by bisection.
pub fn ratio_for_effective_modes(k_prime: f64, gain: f64) -> Result<f64> {
    if !(k_prime > 1.0) {
        return Err(Error::InvalidParameter {
            field: "k_prime",
            reason: format!("target mode number must exceed 1, got {k_prime}"),
        });
    }
    let eval = |mu: f64| double_gauss_effective_modes(mu, gain);
    let (mut lo, mut hi) = (1e-9, 0.995);
    if eval(lo) > k_prime || eval(hi) < k_prime {
        return Err(Error::NoRoot(format!("K' = {k_prime} at G = {gain}")));
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) < k_prime {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn tpa_double_gauss(grid: &PolarGrid, sigma_plus: f64, sigma_minus: f64) -> Result<TpaField> {
    let dg = DoubleGauss::new(sigma_plus, sigma_minus)?;
    let ap = 0.5 / (dg.sigma_plus * dg.sigma_plus);
    let am = 0.5 / (dg.sigma_minus * dg.sigma_minus);
    TpaField::from_fn(grid, move |qs, qi, dphi| {
        let radial = qs * qs + qi * qi;
        let cross = 2.0 * qs * qi * dphi.cos();
        Complex64::new((-ap * (radial + cross) - am * (radial - cross)).exp(), 0.0)
    })
}
