#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use pdc_modes::grid::{build_grid, default_q_max, MAX_AZIMUTHAL_SAMPLES};
use pdc_modes::schmidt::decompose_refining;
use pdc_modes::tpa::{tpa_two_crystal, DoubleGauss};
use pdc_modes::{PdcParams, PolarGrid, SchmidtDecomposition};

/// Generalized Laguerre polynomial by the three-term recurrence.
pub fn laguerre(m: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..m {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `sqrt(q) (q/s)^|n| L_m^|n|(q^2/s^2) exp(-q^2 / 2 s^2)` normalized under `sum w |.|^2`.
pub fn laguerre_gauss_radial(grid: &PolarGrid, m: usize, n: i32, s: f64) -> Vec<f64> {
    let l = n.unsigned_abs() as f64;
    let raw: Vec<f64> = grid
        .q_nodes()
        .iter()
        .map(|&q| {
            let x = q / s;
            q.sqrt() * x.powf(l) * laguerre(m, l, x * x) * (-0.5 * x * x).exp()
        })
        .collect();
    let norm: f64 = raw
        .iter()
        .zip(grid.q_weights())
        .map(|(r, w)| w * r * r)
        .sum::<f64>()
        .sqrt();
    raw.iter().map(|r| r / norm).collect()
}

/// `sum w conj(a) b`.
pub fn inner(grid: &PolarGrid, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .zip(grid.q_weights())
        .map(|((x, y), w)| x.conj() * y * *w)
        .sum()
}

/// L2 distance between `a` and `b` after removing their relative phase.
pub fn phase_aligned_distance(grid: &PolarGrid, a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap = inner(grid, a, b);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .zip(grid.q_weights())
        .map(|((x, y), w)| w * (x * phase - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn double_gauss_decomposition(mu: f64, n_q: usize, threshold: f64) -> (DoubleGauss, SchmidtDecomposition) {
    let dg = DoubleGauss::from_eigenvalue_ratio(mu, 1.0).unwrap();
    let q_max = dg.suggested_q_max(1e-12);
    let dec = decompose_refining(
        |n_phi| dg.field(&build_grid(q_max, n_q, n_phi)?),
        32,
        MAX_AZIMUTHAL_SAMPLES,
        threshold,
    )
    .unwrap();
    (dg, dec)
}

/// Two-crystal decomposition on a reduced grid for fast property checks.
pub fn small_two_crystal(params: &PdcParams, qmax_scale: f64, n_q: usize) -> SchmidtDecomposition {
    let q_max = default_q_max(params).unwrap() * qmax_scale;
    decompose_refining(
        |n_phi| tpa_two_crystal(&build_grid(q_max, n_q, n_phi)?, params),
        32,
        MAX_AZIMUTHAL_SAMPLES,
        1e-8,
    )
    .unwrap()
}

pub fn modest_pump() -> PdcParams {
    PdcParams {
        pump_fwhm: 50e-6,
        ..Default::default()
    }
}

pub const TWO_PI: f64 = 2.0 * PI;
