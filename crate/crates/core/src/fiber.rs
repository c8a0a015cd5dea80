//! Projection of the Schmidt modes onto a Gaussian fiber eigenmode.

use std::f64::consts::{LN_2, PI};

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gain::GainSpectrum;
use crate::grid::PolarGrid;
use crate::params::WaveNumbers;
use crate::schmidt::{SchmidtDecomposition, SchmidtMode};

/// Gaussian fiber mode `f(q) = exp(-q^2 / 2 w^2) / (sqrt(pi) w)` with waist `w`
/// in q-space. Unit norm under `int q dq dphi` analytically; no discrete
/// renormalization is applied.
#[derive(Debug, Clone)]
pub struct FiberMode {
    waist: f64,
    samples: Vec<f64>,
    grid: PolarGrid,
}

impl FiberMode {
    pub fn new(grid: &PolarGrid, waist: f64) -> Result<Self> {
        if !(waist.is_finite() && waist > 0.0) {
            return Err(Error::InvalidParameter {
                field: "waist",
                reason: format!("fiber waist must be positive, got {waist}"),
            });
        }
        let pref = 1.0 / (PI.sqrt() * waist);
        let samples = grid
            .q_nodes()
            .iter()
            .map(|&q| pref * (-0.5 * q * q / (waist * waist)).exp())
            .collect();
        Ok(Self {
            waist,
            samples,
            grid: grid.clone(),
        })
    }

    /// Fiber mode whose angular intensity FWHM equals `delta_theta`.
    pub fn from_angular_width(grid: &PolarGrid, wn: &WaveNumbers, delta_theta: f64) -> Result<Self> {
        Self::new(grid, waist_for_angular_width(delta_theta, wn))
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    /// `2 pi sum w q f^2`.
    pub fn discrete_norm_sq(&self) -> f64 {
        let g = &self.grid;
        2.0 * PI
            * g.q_nodes()
                .iter()
                .zip(g.q_weights())
                .zip(&self.samples)
                .map(|((&q, &w), &f)| w * q * f * f)
                .sum::<f64>()
    }
}

/// Angular intensity FWHM `2 sqrt(ln 2) w / k0_air` of a fiber mode.
pub fn angular_width_of(fiber: &FiberMode, wn: &WaveNumbers) -> f64 {
    2.0 * LN_2.sqrt() * fiber.waist() / wn.k0_air
}

pub fn waist_for_angular_width(delta_theta: f64, wn: &WaveNumbers) -> f64 {
    delta_theta * wn.k0_air / (2.0 * LN_2.sqrt())
}

/// Projection amplitudes of every retained Schmidt mode on the fiber mode.
#[derive(Debug, Clone)]
pub struct CouplingReport {
    pub waist: f64,
    /// Signal amplitudes `C_{mn}`, aligned with the decomposition's modes.
    pub c: Vec<Complex64>,
    /// Idler amplitudes `D_{mn}`.
    pub d: Vec<Complex64>,
    /// `sum |C_{mn}|^2`.
    pub captured_fraction: f64,
    /// `1 - |C_00|^2`, when the (0, 0) mode is retained.
    pub loss00: Option<f64>,
}

/// `int dphi e^{i n phi}` on the azimuthal samples.
fn azimuthal_factor(grid: &PolarGrid, n: i32) -> Complex64 {
    (0..grid.n_phi())
        .map(|k| Complex64::from_polar(grid.dphi(), n as f64 * grid.phi(k)))
        .sum()
}

/// `sum_i w_i q_i f(q_i) g(q_i) / sqrt(2 pi q_i)`: the radial part of the overlap.
fn radial_overlap(grid: &PolarGrid, fiber: &[f64], radial: &[Complex64]) -> Complex64 {
    let inv_2pi = 1.0 / (2.0 * PI).sqrt();
    grid.q_nodes()
        .iter()
        .zip(grid.q_weights())
        .zip(fiber.iter().zip(radial))
        .map(|((&q, &w), (&f, &g))| g * (w * q.sqrt() * f * inv_2pi))
        .sum()
}

fn mode_projection(grid: &PolarGrid, fiber: &[f64], mode: &SchmidtMode, radial: &[Complex64]) -> Complex64 {
    if mode.n == 0 {
        azimuthal_factor(grid, 0) * radial_overlap(grid, fiber, radial)
    } else {
        // Azimuthal selection rule: the fiber mode carries no e^{i n phi}.
        debug_assert!(azimuthal_factor(grid, mode.n).norm() < 1e-12);
        Complex64::new(0.0, 0.0)
    }
}

pub fn project(fiber: &FiberMode, dec: &SchmidtDecomposition) -> Result<CouplingReport> {
    if fiber.grid() != dec.grid() {
        return Err(Error::GridMismatch("fiber mode and Schmidt decomposition"));
    }
    let grid = dec.grid();
    let f = fiber.samples();
    let c: Vec<Complex64> = dec
        .modes()
        .iter()
        .map(|m| mode_projection(grid, f, m, &m.u))
        .collect();
    let d: Vec<Complex64> = dec
        .modes()
        .iter()
        .map(|m| mode_projection(grid, f, m, &m.v))
        .collect();
    let captured_fraction = c.iter().map(|x| x.norm_sqr()).sum();
    let loss00 = dec.mode_index(0, 0).map(|i| 1.0 - c[i].norm_sqr());
    Ok(CouplingReport {
        waist: fiber.waist(),
        c,
        d,
        captured_fraction,
        loss00,
    })
}

/// `T = sum |C_{mn}|^2 lambda'_{mn}`.
pub fn coupling_efficiency(report: &CouplingReport, gain: &GainSpectrum) -> Result<f64> {
    if report.c.len() != gain.modes.len() {
        return Err(Error::ModeCountMismatch(report.c.len(), gain.modes.len()));
    }
    Ok(report
        .c
        .iter()
        .zip(&gain.modes)
        .map(|(c, g)| c.norm_sqr() * g.lambda_prime)
        .sum())
}

/// `|C_00(w)|^2` for a fiber waist `w`.
pub fn first_mode_overlap(dec: &SchmidtDecomposition, waist: f64) -> Result<f64> {
    let mode = dec.mode(0, 0).ok_or(Error::MissingMode { m: 0, n: 0 })?;
    let fiber = FiberMode::new(dec.grid(), waist)?;
    Ok(mode_projection(dec.grid(), fiber.samples(), mode, &mode.u).norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEstimate {
    /// Minimal `1 - |C_00|^2`.
    pub loss: f64,
    /// Fiber waist (q-space) achieving it.
    pub waist: f64,
}

/// Second-moment width `sqrt(int q^2 |u~_00|^2 dq)` of the first mode, equal
/// to `w` for a Gaussian `exp(-q^2 / 2 w^2)`.
pub fn first_mode_moment_width(dec: &SchmidtDecomposition) -> Result<f64> {
    let mode = dec.mode(0, 0).ok_or(Error::MissingMode { m: 0, n: 0 })?;
    let g = dec.grid();
    let m2: f64 = g
        .q_nodes()
        .iter()
        .zip(g.q_weights())
        .zip(&mode.u)
        .map(|((&q, &w), u)| w * q * q * u.norm_sqr())
        .sum();
    Ok(m2.sqrt())
}

/// Number of strict interior local maxima plus a maximum at either end.
pub fn count_local_maxima(values: &[f64]) -> usize {
    let n = values.len();
    if n < 2 {
        return n;
    }
    let mut count = 0;
    for i in 0..n {
        let left = i == 0 || values[i] > values[i - 1];
        let right = i == n - 1 || values[i] >= values[i + 1];
        if left && right {
            count += 1;
        }
    }
    count
}

const SCAN_POINTS: usize = 41;
const MAX_WIDENINGS: usize = 6;
const WAIST_REL_TOL: f64 = 1e-4;

/// Maximizes `|C_00(w)|^2` over the fiber waist.
///
/// A log-spaced scan over `[w_est / 5, 5 w_est]` brackets the maximum, widening
/// the range when the best point sits on an edge, then golden-section search
/// refines the waist to relative tolerance 1e-4.
pub fn intrinsic_loss(dec: &SchmidtDecomposition) -> Result<LossEstimate> {
    let w_est = first_mode_moment_width(dec)?;
    let objective = |log_w: f64| first_mode_overlap(dec, log_w.exp());

    let (mut lo, mut hi) = ((w_est / 5.0).ln(), (5.0 * w_est).ln());
    let mut widenings = 0;
    let (best, xs) = loop {
        let xs: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| objective(x)).collect::<Result<_>>()?;
        let best = ys
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if count_local_maxima(&ys) > 1 {
            warn!("first-mode overlap is not unimodal in the fiber waist");
        }
        let on_edge = best == 0 || best == SCAN_POINTS - 1;
        if on_edge && widenings < MAX_WIDENINGS {
            warn!("fiber waist bracket widened (optimum at the edge)");
            let span = hi - lo;
            if best == 0 {
                lo -= span;
            } else {
                hi += span;
            }
            widenings += 1;
            continue;
        }
        break (best, xs);
    };

    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(SCAN_POINTS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    // bracket width in log w is the relative waist tolerance
    while b - a > 0.01 * WAIST_REL_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1)?;
        }
    }
    let log_w = 0.5 * (a + b);
    let overlap = objective(log_w)?;
    Ok(LossEstimate {
        loss: (1.0 - overlap).max(0.0),
        waist: log_w.exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingPoint {
    pub delta_theta: f64,
    pub waist: f64,
    pub efficiency: f64,
}

/// Coupling efficiency for each fiber angular width (FWHM, radians).
pub fn coupling_curve(
    dec: &SchmidtDecomposition,
    gain: &GainSpectrum,
    wn: &WaveNumbers,
    widths: &[f64],
) -> Result<Vec<CouplingPoint>> {
    if let Some(&bad) = widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidParameter {
            field: "widths",
            reason: format!("angular widths must be positive, got {bad}"),
        });
    }
    let points: Vec<CouplingPoint> = widths
        .par_iter()
        .map(|&dt| {
            let fiber = FiberMode::from_angular_width(dec.grid(), wn, dt)?;
            let report = project(&fiber, dec)?;
            Ok(CouplingPoint {
                delta_theta: dt,
                waist: fiber.waist(),
                efficiency: coupling_efficiency(&report, gain)?,
            })
        })
        .collect::<Result<_>>()?;
    let t: Vec<f64> = points.iter().map(|p| p.efficiency).collect();
    if count_local_maxima(&t) > 1 {
        warn!("coupling curve has more than one maximum");
    }
    Ok(points)
}
