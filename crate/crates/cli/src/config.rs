//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Lengths take a unit suffix
//! (`nm`, `um`, `µm`, `mm`, `m`), angles `mrad` or `rad`; bare numbers are SI.
//! Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pdc_modes::grid::{DEFAULT_AZIMUTHAL_SAMPLES, DEFAULT_RADIAL_NODES};
use pdc_modes::schmidt::DEFAULT_TRUNCATION;
use pdc_modes::PdcParams;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("{key}: cannot parse `{value}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    TwoCrystal,
    DoubleGauss,
}

impl Model {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "two-crystal" => Some(Self::TwoCrystal),
            "double-gauss" => Some(Self::DoubleGauss),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::TwoCrystal => "two-crystal",
            Self::DoubleGauss => "double-gauss",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }

    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        if self.count < 2 {
            return Err(ConfigError::Invalid(format!("{name}: sweep count must be >= 2, got {}", self.count)));
        }
        if !(self.start > 0.0 && self.stop > self.start && self.stop.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "{name}: sweep range must be positive and increasing, got {} .. {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: PdcParams,
    pub n_q: usize,
    /// Starting azimuthal sample count; doubled automatically when too coarse.
    pub n_phi: usize,
    pub qmax_scale: f64,
    pub threshold: f64,
    pub model: Model,
    /// Eigenvalue decay of the double-Gauss kernel.
    pub mu: f64,
    /// q-space waist of the double-Gauss first mode (rad/m).
    pub dg_waist: f64,
    /// Pump widths (m).
    pub fig3: Sweep,
    /// Fiber angular widths (rad).
    pub fig6a: Sweep,
    /// Fiber waist over first-mode waist.
    pub fig8: Sweep,
    pub fig8_k_prime: f64,
    pub fig8_gains: Vec<f64>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: PdcParams::default(),
            n_q: DEFAULT_RADIAL_NODES,
            n_phi: DEFAULT_AZIMUTHAL_SAMPLES,
            qmax_scale: 1.0,
            threshold: DEFAULT_TRUNCATION,
            model: Model::TwoCrystal,
            mu: 0.5,
            dg_waist: 3.5e4,
            fig3: Sweep {
                start: 20e-6,
                stop: 300e-6,
                count: 15,
            },
            fig6a: Sweep {
                start: 2e-3,
                stop: 20e-3,
                count: 25,
            },
            fig8: Sweep {
                start: 0.3,
                stop: 3.0,
                count: 136,
            },
            fig8_k_prime: 5.0,
            fig8_gains: vec![1.0, 10.0],
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Copy)]
enum Unit {
    Length,
    Angle,
    Plain,
}

fn parse_number(key: &str, value: &str, unit: Unit) -> Result<f64, ConfigError> {
    let bad = |reason: &str| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    };
    let v = value.trim();
    let suffixes: &[(&str, f64)] = match unit {
        Unit::Length => &[("nm", 1e-9), ("um", 1e-6), ("µm", 1e-6), ("mm", 1e-3), ("m", 1.0)],
        Unit::Angle => &[("mrad", 1e-3), ("rad", 1.0)],
        Unit::Plain => &[],
    };
    let (number, factor) = suffixes
        .iter()
        .find_map(|(s, f)| v.strip_suffix(s).map(|n| (n.trim(), *f)))
        .unwrap_or((v, 1.0));
    let x: f64 = number.parse().map_err(|_| bad("not a number"))?;
    if !x.is_finite() {
        return Err(bad("not finite"));
    }
    Ok(x * factor)
}

fn parse_count(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: "expected a non-negative integer".into(),
    })
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Parses a configuration on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Malformed {
                line,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Malformed {
                    line,
                    text: raw.to_string(),
                });
            }
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            cfg.set(key, value).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line, key },
                other => other,
            })?;
            seen.push(key.to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let len = |v: &str| parse_number(key, v, Unit::Length);
        let plain = |v: &str| parse_number(key, v, Unit::Plain);
        let p = &mut self.params;
        match key {
            "pump_wavelength" => p.pump_wavelength = len(value)?,
            "signal_wavelength" => p.signal_wavelength = len(value)?,
            "pump_fwhm_a" => p.pump_fwhm = len(value)?,
            "crystal_length_L" => p.crystal_length = len(value)?,
            "gap_length_l" => p.gap_length = len(value)?,
            "n0" => p.n0 = plain(value)?,
            "n0_air" => p.n0_air = plain(value)?,
            "np_crystal" => p.np_crystal = plain(value)?,
            "np_air" => p.np_air = plain(value)?,
            "phase_mismatch_offset" => p.phase_mismatch_offset = plain(value.trim_end_matches("/m").trim())?,
            "gain_G" => p.gain = plain(value)?,
            "nq" => self.n_q = parse_count(key, value)?,
            "nphi" => self.n_phi = parse_count(key, value)?,
            "qmax_scale" => self.qmax_scale = plain(value)?,
            "threshold" => self.threshold = plain(value)?,
            "model" => {
                self.model = Model::parse(value).ok_or_else(|| ConfigError::BadValue {
                    key: key.into(),
                    value: value.into(),
                    reason: "expected two-crystal or double-gauss".into(),
                })?
            }
            "mu" => self.mu = plain(value)?,
            "dg_waist" => self.dg_waist = plain(value.trim_end_matches("/m").trim())?,
            "fig3_start" => self.fig3.start = len(value)?,
            "fig3_stop" => self.fig3.stop = len(value)?,
            "fig3_count" => self.fig3.count = parse_count(key, value)?,
            "fig6a_start" => self.fig6a.start = parse_number(key, value, Unit::Angle)?,
            "fig6a_stop" => self.fig6a.stop = parse_number(key, value, Unit::Angle)?,
            "fig6a_count" => self.fig6a.count = parse_count(key, value)?,
            "fig8_start" => self.fig8.start = plain(value)?,
            "fig8_stop" => self.fig8.stop = plain(value)?,
            "fig8_count" => self.fig8.count = parse_count(key, value)?,
            "fig8_k_prime" => self.fig8_k_prime = plain(value)?,
            "fig8_gains" => {
                self.fig8_gains = value
                    .split(',')
                    .map(plain)
                    .collect::<Result<_, _>>()?
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.n_q < pdc_modes::grid::MIN_RADIAL_NODES {
            return Err(ConfigError::Invalid(format!("nq must be >= 16, got {}", self.n_q)));
        }
        if self.n_phi < pdc_modes::grid::MIN_AZIMUTHAL_SAMPLES || self.n_phi % 2 != 0 {
            return Err(ConfigError::Invalid(format!("nphi must be even and >= 8, got {}", self.n_phi)));
        }
        if !(self.qmax_scale > 0.0) {
            return Err(ConfigError::Invalid(format!("qmax_scale must be positive, got {}", self.qmax_scale)));
        }
        if !(0.0..1.0).contains(&self.threshold) {
            return Err(ConfigError::Invalid(format!("threshold must lie in [0, 1), got {}", self.threshold)));
        }
        if !(0.0..1.0).contains(&self.mu) {
            return Err(ConfigError::Invalid(format!("mu must lie in [0, 1), got {}", self.mu)));
        }
        if !(self.dg_waist > 0.0) {
            return Err(ConfigError::Invalid(format!("dg_waist must be positive, got {}", self.dg_waist)));
        }
        self.fig3.validate("fig3")?;
        self.fig6a.validate("fig6a")?;
        self.fig8.validate("fig8")?;
        if !(self.fig8_k_prime > 1.0) {
            return Err(ConfigError::Invalid(format!("fig8_k_prime must exceed 1, got {}", self.fig8_k_prime)));
        }
        if self.fig8_gains.is_empty() || self.fig8_gains.iter().any(|g| !(*g > 0.0)) {
            return Err(ConfigError::Invalid("fig8_gains must be positive".into()));
        }
        Ok(())
    }

    /// Every key in SI units, one line, for the header of output files.
    pub fn render(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = write!(
            s,
            "pump_wavelength={} signal_wavelength={} pump_fwhm_a={} crystal_length_L={} gap_length_l={} \
             n0={} n0_air={} np_crystal={} np_air={} phase_mismatch_offset={} gain_G={} \
             nq={} nphi={} qmax_scale={} threshold={} model={} mu={} dg_waist={} \
             fig3_start={} fig3_stop={} fig3_count={} fig6a_start={} fig6a_stop={} fig6a_count={} \
             fig8_start={} fig8_stop={} fig8_count={} fig8_k_prime={} fig8_gains={}",
            p.pump_wavelength,
            p.signal_wavelength,
            p.pump_fwhm,
            p.crystal_length,
            p.gap_length,
            p.n0,
            p.n0_air,
            p.np_crystal,
            p.np_air,
            p.phase_mismatch_offset,
            p.gain,
            self.n_q,
            self.n_phi,
            self.qmax_scale,
            self.threshold,
            self.model.name(),
            self.mu,
            self.dg_waist,
            self.fig3.start,
            self.fig3.stop,
            self.fig3.count,
            self.fig6a.start,
            self.fig6a.stop,
            self.fig6a.count,
            self.fig8.start,
            self.fig8.stop,
            self.fig8.count,
            self.fig8_k_prime,
            self.fig8_gains
                .iter()
                .map(|g| g.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        s
    }
}
