//! Physical parameters of the two-crystal down-conversion source.
//!
//! All quantities are SI: lengths in metres, wavenumbers in rad/m.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Constants of the two-crystal source and the parametric gain.
///
/// The pump wavenumber inside the crystal is not an independent input: it is
/// fixed by collinear degenerate phase matching, `k_p = 2 k_0 + phase_mismatch_offset`,
/// so that the on-axis longitudinal mismatch equals the offset. `np_crystal`
/// is validated and kept for reporting only.
#[derive(Debug, Clone, PartialEq)]
pub struct PdcParams {
    /// Vacuum wavelength of the pump.
    pub pump_wavelength: f64,
    /// Vacuum wavelength of the (degenerate) signal and idler.
    pub signal_wavelength: f64,
    /// FWHM of the pump intensity profile.
    pub pump_fwhm: f64,
    /// Length of each crystal.
    pub crystal_length: f64,
    /// Air gap between the crystals.
    pub gap_length: f64,
    /// Signal/idler refractive index inside the crystals.
    pub n0: f64,
    /// Signal/idler refractive index inside the gap.
    pub n0_air: f64,
    pub np_crystal: f64,
    pub np_air: f64,
    /// Additive detuning of the on-axis crystal mismatch (rad/m).
    pub phase_mismatch_offset: f64,
    /// Parametric gain `G`.
    pub gain: f64,
}

impl Default for PdcParams {
    /// Two 1 mm BBO-like crystals, 2.5 mm gap, 110 um pump, 355 nm -> 710 nm.
    fn default() -> Self {
        Self {
            pump_wavelength: 355e-9,
            signal_wavelength: 710e-9,
            pump_fwhm: 110e-6,
            crystal_length: 1e-3,
            gap_length: 2.5e-3,
            n0: 1.66,
            n0_air: 1.0,
            np_crystal: 1.66,
            np_air: 1.0,
            phase_mismatch_offset: 0.0,
            gain: 22.8,
        }
    }
}

impl PdcParams {
    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("pump_wavelength", self.pump_wavelength),
            ("signal_wavelength", self.signal_wavelength),
            ("pump_fwhm_a", self.pump_fwhm),
            ("crystal_length_L", self.crystal_length),
            ("gap_length_l", self.gap_length),
        ];
        for (field, value) in lengths {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("length must be strictly positive, got {value}"),
                });
            }
        }
        let indices = [
            ("n0", self.n0),
            ("n0_air", self.n0_air),
            ("np_crystal", self.np_crystal),
            ("np_air", self.np_air),
        ];
        for (field, value) in indices {
            if !(value.is_finite() && value >= 1.0) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("refractive index must be >= 1, got {value}"),
                });
            }
        }
        if !self.phase_mismatch_offset.is_finite() {
            return Err(Error::InvalidParameter {
                field: "phase_mismatch_offset",
                reason: "must be finite".into(),
            });
        }
        if !(self.gain.is_finite() && self.gain >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "gain_G",
                reason: format!("gain must be >= 0, got {}", self.gain),
            });
        }
        Ok(())
    }

    /// Ratio `n0 / n0_air` refracting internal angles into the gap.
    pub fn index_ratio(&self) -> f64 {
        self.n0 / self.n0_air
    }
}

/// Wavenumbers `2 pi n / lambda` in each medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveNumbers {
    pub k0_crystal: f64,
    pub kp_crystal: f64,
    pub k0_air: f64,
    pub kp_air: f64,
}

impl WaveNumbers {
    /// On-axis crystal mismatch `k_p - 2 k_0`.
    pub fn axial_mismatch(&self) -> f64 {
        self.kp_crystal - 2.0 * self.k0_crystal
    }

    /// On-axis gap mismatch `k_p^air - 2 k_0^air`.
    pub fn axial_gap_mismatch(&self) -> f64 {
        self.kp_air - 2.0 * self.k0_air
    }
}

fn wavenumber(index: f64, wavelength: f64) -> f64 {
    2.0 * PI * index / wavelength
}

pub fn derive_wavenumbers(params: &PdcParams) -> Result<WaveNumbers> {
    params.validate()?;
    let k0_crystal = wavenumber(params.n0, params.signal_wavelength);
    let wn = WaveNumbers {
        k0_crystal,
        kp_crystal: 2.0 * k0_crystal + params.phase_mismatch_offset,
        k0_air: wavenumber(params.n0_air, params.signal_wavelength),
        kp_air: wavenumber(params.np_air, params.pump_wavelength),
    };
    debug_assert!(
        (wn.axial_mismatch() - params.phase_mismatch_offset).abs() < 1e-9 * k0_crystal
    );
    Ok(wn)
}
