//! Figure-regeneration drivers. Each `run_*` builds the model from the
//! configuration, computes its table and returns a report; writing files is
//! left to the caller.

use std::io;

use log::warn;
use rayon::prelude::*;

use pdc_modes::fiber::{self, CouplingPoint};
use pdc_modes::gain::{apply_gain, GainSpectrum};
use pdc_modes::grid::{build_grid, default_q_max, MAX_AZIMUTHAL_SAMPLES};
use pdc_modes::schmidt::{decompose_refining, FullMode};
use pdc_modes::tpa::{tpa_two_crystal, DoubleGauss};
use pdc_modes::params::derive_wavenumbers;
use pdc_modes::{correlations, FiberMode, PdcParams, SchmidtDecomposition};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Model};
use crate::output::{Cell, Table};

/// Slack allowed on `T <= lambda'_00` for rounding in the projections.
const BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] pdc_modes::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type RunResult<T> = Result<T, RunError>;

/// Double-Gauss kernel with eigenvalue ratio `mu` and first-mode waist `waist`.
fn double_gauss_decomposition(cfg: &ExperimentConfig, dg: &DoubleGauss) -> RunResult<SchmidtDecomposition> {
    let q_max = dg.suggested_q_max(1e-12) * cfg.qmax_scale;
    let dec = decompose_refining(
        |n_phi| dg.field(&build_grid(q_max, cfg.n_q, n_phi)?),
        cfg.n_phi,
        MAX_AZIMUTHAL_SAMPLES,
        cfg.threshold,
    )?;
    Ok(dec)
}

fn two_crystal_decomposition(cfg: &ExperimentConfig, params: &PdcParams) -> RunResult<SchmidtDecomposition> {
    let q_max = default_q_max(params)? * cfg.qmax_scale;
    let dec = decompose_refining(
        |n_phi| tpa_two_crystal(&build_grid(q_max, cfg.n_q, n_phi)?, params),
        cfg.n_phi,
        MAX_AZIMUTHAL_SAMPLES,
        cfg.threshold,
    )?;
    Ok(dec)
}

/// Schmidt decomposition of the configured model.
pub fn decompose_model(cfg: &ExperimentConfig) -> RunResult<SchmidtDecomposition> {
    match cfg.model {
        Model::TwoCrystal => two_crystal_decomposition(cfg, &cfg.params),
        Model::DoubleGauss => {
            let dg = DoubleGauss::from_eigenvalue_ratio(cfg.mu, cfg.dg_waist)?;
            double_gauss_decomposition(cfg, &dg)
        }
    }
}

fn check_sum_rule(dec: &SchmidtDecomposition) -> RunResult<()> {
    let sum: f64 = dec.eigenvalues().iter().sum();
    let residual = (sum + dec.truncated_weight() - 1.0).abs();
    if residual > 1e-9 {
        return Err(RunError::Invariant(format!(
            "eigenvalues sum to {sum} with truncated weight {:e}",
            dec.truncated_weight()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------- fig5

#[derive(Debug, Clone)]
pub struct Fig5Report {
    pub schmidt_number: f64,
    pub k_prime: f64,
    pub lambda00: f64,
    pub lambda_prime00: f64,
    pub truncated_weight: f64,
    pub mode_count: usize,
    pub table: Table,
}

pub fn spectrum_at_gain(dec: &SchmidtDecomposition, gain: f64) -> RunResult<GainSpectrum> {
    let spectrum = apply_gain(dec, gain)?;
    let total: f64 = spectrum.lambda_prime().iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(RunError::Invariant(format!("renormalized eigenvalues sum to {total}")));
    }
    Ok(spectrum)
}

pub fn fig5_from(dec: &SchmidtDecomposition, gain: f64) -> RunResult<Fig5Report> {
    check_sum_rule(dec)?;
    let spectrum = spectrum_at_gain(dec, gain)?;
    let mut table = Table::new(&["m", "n", "lambda", "lambda_prime"]);
    for mode in &spectrum.modes {
        table.push(vec![mode.m.into(), mode.n.into(), mode.lambda.into(), mode.lambda_prime.into()]);
    }
    Ok(Fig5Report {
        schmidt_number: dec.schmidt_number()?,
        k_prime: spectrum.k_prime,
        lambda00: dec.eigenvalue(0, 0).ok_or(pdc_modes::Error::MissingMode { m: 0, n: 0 })?,
        lambda_prime00: spectrum.first_lambda_prime().ok_or(pdc_modes::Error::EmptySpectrum)?,
        truncated_weight: dec.truncated_weight(),
        mode_count: dec.modes().len(),
        table,
    })
}

pub fn run_fig5(cfg: &ExperimentConfig) -> RunResult<Fig5Report> {
    let dec = decompose_model(cfg)?;
    fig5_from(&dec, cfg.params.gain)
}

// ---------------------------------------------------------------- fig6a

#[derive(Debug, Clone)]
pub struct Fig6aReport {
    pub points: Vec<CouplingPoint>,
    pub peak: CouplingPoint,
    pub lambda_prime00: f64,
    pub maxima: usize,
    pub table: Table,
}

pub fn fig6a_from(cfg: &ExperimentConfig, dec: &SchmidtDecomposition) -> RunResult<Fig6aReport> {
    let wn = derive_wavenumbers(&cfg.params)?;
    let spectrum = spectrum_at_gain(dec, cfg.params.gain)?;
    let lambda_prime00 = spectrum.first_lambda_prime().ok_or(pdc_modes::Error::EmptySpectrum)?;
    let points = fiber::coupling_curve(dec, &spectrum, &wn, &cfg.fig6a.points())?;
    if let Some(p) = points.iter().find(|p| p.efficiency > lambda_prime00 + BOUND_SLACK) {
        return Err(RunError::Invariant(format!(
            "coupling efficiency {} at {} rad exceeds lambda'_00 = {lambda_prime00}",
            p.efficiency, p.delta_theta
        )));
    }
    let efficiencies: Vec<f64> = points.iter().map(|p| p.efficiency).collect();
    let maxima = fiber::count_local_maxima(&efficiencies);
    let peak = *points
        .iter()
        .max_by(|a, b| a.efficiency.total_cmp(&b.efficiency))
        .expect("sweep has at least two points");
    let mut table = Table::new(&["delta_theta_mrad", "T"]);
    for p in &points {
        table.push(vec![(p.delta_theta * 1e3).into(), p.efficiency.into()]);
    }
    Ok(Fig6aReport {
        points,
        peak,
        lambda_prime00,
        maxima,
        table,
    })
}

pub fn run_fig6a(cfg: &ExperimentConfig) -> RunResult<Fig6aReport> {
    let dec = decompose_model(cfg)?;
    fig6a_from(cfg, &dec)
}

// ---------------------------------------------------------------- fig3

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Row {
    pub pump_fwhm: f64,
    /// `None` when the point failed; the row is written as `nan`.
    pub loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Fig3Report {
    pub rows: Vec<Fig3Row>,
    /// Loss at a 110 um pump, evaluated separately when not a sweep point.
    pub loss_at_110um: Option<f64>,
    pub table: Table,
}

/// Intrinsic loss of the two-crystal source at pump width `pump_fwhm`.
pub fn loss_for_pump_width(cfg: &ExperimentConfig, pump_fwhm: f64) -> RunResult<f64> {
    let params = PdcParams {
        pump_fwhm,
        ..cfg.params.clone()
    };
    let dec = two_crystal_decomposition(cfg, &params)?;
    Ok(fiber::intrinsic_loss(&dec)?.loss)
}

/// Points run one after another: a wide pump needs a fine azimuthal grid and
/// the amplitude alone can take gigabytes, so only the inner loops run in
/// parallel.
pub fn run_fig3(cfg: &ExperimentConfig) -> RunResult<Fig3Report> {
    if cfg.model != Model::TwoCrystal {
        return Err(ConfigError::Invalid("fig3 sweeps the pump width and needs model = two-crystal".into()).into());
    }
    let mut rows = Vec::new();
    for a in cfg.fig3.points() {
        let loss = match loss_for_pump_width(cfg, a) {
            Ok(loss) => Some(loss),
            Err(RunError::Model(err)) => {
                warn!("pump width {:.1} um skipped: {err}", a * 1e6);
                None
            }
            Err(err) => return Err(err),
        };
        rows.push(Fig3Row { pump_fwhm: a, loss });
    }
    let at_110 = rows
        .iter()
        .find(|r| (r.pump_fwhm - 110e-6).abs() < 1e-12)
        .map(|r| r.loss);
    let loss_at_110um = match at_110 {
        Some(loss) => loss,
        None => match loss_for_pump_width(cfg, 110e-6) {
            Ok(loss) => Some(loss),
            Err(RunError::Model(err)) => {
                warn!("loss at 110 um unavailable: {err}");
                None
            }
            Err(err) => return Err(err),
        },
    };
    let mut table = Table::new(&["pump_fwhm_um", "loss_percent"]);
    for r in &rows {
        table.push(vec![(r.pump_fwhm * 1e6).into(), r.loss.map_or(f64::NAN, |l| 100.0 * l).into()]);
    }
    Ok(Fig3Report {
        rows,
        loss_at_110um,
        table,
    })
}

// ---------------------------------------------------------------- fig8

#[derive(Debug, Clone)]
pub struct Fig8Curve {
    pub gain: f64,
    pub mu: f64,
    /// Effective mode number of the numerical spectrum.
    pub k_prime: f64,
    pub first_mode_waist: f64,
    /// `(w / w0, g2_si)`.
    pub points: Vec<(f64, f64)>,
}

impl Fig8Curve {
    /// Waist ratio at the smallest g2.
    pub fn minimum_at(&self) -> f64 {
        self.points
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|p| p.0)
            .unwrap_or(f64::NAN)
    }

    pub fn range(&self) -> f64 {
        let max = self.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let min = self.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        max - min
    }
}

#[derive(Debug, Clone)]
pub struct Fig8Report {
    pub curves: Vec<Fig8Curve>,
    pub table: Table,
}

fn fig8_curve(cfg: &ExperimentConfig, gain: f64) -> RunResult<Fig8Curve> {
    let dg = DoubleGauss::for_effective_modes(cfg.fig8_k_prime, gain, cfg.dg_waist)?;
    let dec = double_gauss_decomposition(cfg, &dg)?;
    check_sum_rule(&dec)?;
    let spectrum = spectrum_at_gain(&dec, gain)?;
    let w0 = dg.first_mode_waist();
    let points = cfg
        .fig8
        .points()
        .par_iter()
        .map(|&ratio| {
            let fiber = FiberMode::new(dec.grid(), ratio * w0)?;
            let report = fiber::project(&fiber, &dec)?;
            let g = correlations::correlations(&report, &spectrum)?;
            if (g.g2_ss - 2.0).abs() > correlations::AUTO_IDENTITY_TOL {
                return Err(RunError::Invariant(format!("g2_ss = {} at w/w0 = {ratio}", g.g2_ss)));
            }
            Ok((ratio, g.g2_si))
        })
        .collect::<RunResult<Vec<_>>>()?;
    Ok(Fig8Curve {
        gain,
        mu: dg.eigenvalue_ratio(),
        k_prime: spectrum.k_prime,
        first_mode_waist: w0,
        points,
    })
}

pub fn run_fig8(cfg: &ExperimentConfig) -> RunResult<Fig8Report> {
    let curves = cfg
        .fig8_gains
        .iter()
        .map(|&g| fig8_curve(cfg, g))
        .collect::<RunResult<Vec<_>>>()?;
    let mut table = Table::new(&["w_over_w0", "g2_si", "gain"]);
    for curve in &curves {
        for &(ratio, g2) in &curve.points {
            table.push(vec![ratio.into(), g2.into(), curve.gain.into()]);
        }
    }
    Ok(Fig8Report { curves, table })
}

// ---------------------------------------------------------------- decompose

#[derive(Debug, Clone)]
pub struct DecomposeReport {
    pub schmidt_number: f64,
    pub k_prime: f64,
    pub truncated_weight: f64,
    pub spectrum: Table,
    /// `(file stem, radial profile)` for the leading modes.
    pub profiles: Vec<(String, Table)>,
}

fn profile_table(dec: &SchmidtDecomposition, mode: &FullMode) -> Table {
    let mut t = Table::new(&["q", "re_u", "im_u"]);
    for (&q, u) in dec.grid().q_nodes().iter().zip(&mode.radial) {
        t.push(vec![q.into(), u.re.into(), u.im.into()]);
    }
    t
}

pub fn run_decompose(cfg: &ExperimentConfig, profiles: usize) -> RunResult<DecomposeReport> {
    let dec = decompose_model(cfg)?;
    check_sum_rule(&dec)?;
    let gain = spectrum_at_gain(&dec, cfg.params.gain)?;
    let mut spectrum = Table::new(&["m", "n", "lambda", "lambda_renormalized", "c", "s", "N_k"]);
    for mode in &gain.modes {
        spectrum.push(vec![
            mode.m.into(),
            mode.n.into(),
            mode.lambda.into(),
            mode.lambda_prime.into(),
            Cell::Real(mode.c),
            Cell::Real(mode.s),
            Cell::Real(mode.photons),
        ]);
    }
    let mut tables = Vec::new();
    for mode in dec.modes().iter().take(profiles) {
        let full = pdc_modes::schmidt::assemble_full_mode(&dec, mode.m, mode.n)?;
        tables.push((format!("profile_m{}_n{}", mode.m, mode.n), profile_table(&dec, &full)));
    }
    Ok(DecomposeReport {
        schmidt_number: dec.schmidt_number()?,
        k_prime: gain.k_prime,
        truncated_weight: dec.truncated_weight(),
        spectrum,
        profiles: tables,
    })
}
