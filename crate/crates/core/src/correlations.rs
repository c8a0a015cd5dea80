//! Second-order correlations of the fiber-filtered field.
//!
//! After the fiber the signal operator is `A = sum_k C_k A_k` and the idler
//! `B = sum_k D_k B_k`. With the Bogolyubov output operators the needed
//! normally ordered moments are
//!
//! ```text
//! <A_i^+ A_j^+ A_k A_l> = s_i s_j s_k s_l (d_jk d_il + d_ik d_jl)
//! <A_i^+ B_j^+ A_k B_l> = s_i c_j c_k s_l d_ij d_kl + s_i s_j s_k s_l d_ik d_jl
//! ```
//!
//! and each Kronecker pair collapses the fourfold sum into a product of
//! single sums.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fiber::CouplingReport;
use crate::gain::GainSpectrum;

/// Tolerance on the thermal autocorrelation identity.
pub const AUTO_IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub g2_ss: f64,
    pub g2_si: f64,
    pub n_s: f64,
    pub n_i: f64,
}

fn check_lengths(report: &CouplingReport, gain: &GainSpectrum) -> Result<()> {
    if report.c.len() != gain.modes.len() || report.d.len() != gain.modes.len() {
        return Err(Error::ModeCountMismatch(report.c.len(), gain.modes.len()));
    }
    Ok(())
}

/// `N = sum_k |C_k|^2 s_k^2`.
pub fn photon_number(coeffs: &[Complex64], s: &[f64]) -> f64 {
    coeffs.iter().zip(s).map(|(c, s)| c.norm_sqr() * s * s).sum()
}

/// Mean signal and idler photon numbers transmitted by the fiber.
pub fn photon_numbers_after_fiber(report: &CouplingReport, gain: &GainSpectrum) -> Result<(f64, f64)> {
    check_lengths(report, gain)?;
    let s: Vec<f64> = gain.modes.iter().map(|m| m.s).collect();
    Ok((photon_number(&report.c, &s), photon_number(&report.d, &s)))
}

/// `<A^+ A^+ A A> / N_s^2` from the two Kronecker contractions.
pub fn g2_auto_from(coeffs: &[Complex64], s: &[f64]) -> Result<f64> {
    // Only modes with C_k != 0 contribute.
    let terms: Vec<(Complex64, f64)> = coeffs
        .iter()
        .zip(s)
        .filter(|(c, _)| c.norm_sqr() > 0.0)
        .map(|(&c, &s)| (c, s))
        .collect();
    let n_s: f64 = terms.iter().map(|(c, s)| c.norm_sqr() * s * s).sum();
    if !(n_s > 0.0) {
        return Err(Error::ZeroPhotonNumber);
    }
    let mut exchange = Complex64::new(0.0, 0.0); // d_jk d_il
    let mut direct = Complex64::new(0.0, 0.0); // d_ik d_jl
    for &(ci, si) in &terms {
        for &(cj, sj) in &terms {
            let weight = si * si * sj * sj;
            exchange += ci.conj() * cj.conj() * cj * ci * weight;
            direct += ci.conj() * cj.conj() * ci * cj * weight;
        }
    }
    let g2 = (exchange + direct).re / (n_s * n_s);
    if (g2 - 2.0).abs() > AUTO_IDENTITY_TOL {
        return Err(Error::CorrelatorIdentity(g2));
    }
    Ok(2.0)
}

/// `1 + |sum C_i^* D_i^* s_i c_i|^2 / (N_s N_i)`.
pub fn g2_cross_from(c_sig: &[Complex64], d_idl: &[Complex64], s: &[f64], c: &[f64]) -> Result<f64> {
    let n_s = photon_number(c_sig, s);
    let n_i = photon_number(d_idl, s);
    if !(n_s > 0.0 && n_i > 0.0) {
        return Err(Error::ZeroPhotonNumber);
    }
    // d_ij d_kl: (sum_i C_i^* D_i^* s_i c_i)(sum_k C_k D_k c_k s_k)
    let pair: Complex64 = c_sig
        .iter()
        .zip(d_idl)
        .zip(s.iter().zip(c))
        .map(|((ci, di), (si, ci_cosh))| ci.conj() * di.conj() * (si * ci_cosh))
        .sum();
    let paired = pair.norm_sqr();
    // d_ik d_jl: N_s N_i
    let direct = n_s * n_i;
    Ok((paired + direct) / direct)
}

pub fn g2_auto(report: &CouplingReport, gain: &GainSpectrum) -> Result<f64> {
    check_lengths(report, gain)?;
    let s: Vec<f64> = gain.modes.iter().map(|m| m.s).collect();
    g2_auto_from(&report.c, &s)
}

pub fn g2_cross(report: &CouplingReport, gain: &GainSpectrum) -> Result<f64> {
    check_lengths(report, gain)?;
    let s: Vec<f64> = gain.modes.iter().map(|m| m.s).collect();
    let c: Vec<f64> = gain.modes.iter().map(|m| m.c).collect();
    g2_cross_from(&report.c, &report.d, &s, &c)
}

pub fn correlations(report: &CouplingReport, gain: &GainSpectrum) -> Result<CorrelationResult> {
    let (n_s, n_i) = photon_numbers_after_fiber(report, gain)?;
    Ok(CorrelationResult {
        g2_ss: g2_auto(report, gain)?,
        g2_si: g2_cross(report, gain)?,
        n_s,
        n_i,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matched_single_mode() {
        for g in [0.5f64, 1.0, 5.0, 22.8] {
            let s = g.sinh();
            let c = g.cosh();
            let one = [Complex64::new(1.0, 0.0)];
            let g2 = g2_cross_from(&one, &one, &[s], &[c]).unwrap();
            assert!((g2 - (2.0 + 1.0 / (s * s))).abs() < 1e-10 * g2);
            assert_eq!(g2_auto_from(&one, &[s]).unwrap(), 2.0);
        }
    }

    #[test]
    fn vacuum_has_no_correlation() {
        let one = [Complex64::new(1.0, 0.0)];
        assert_eq!(photon_number(&one, &[0.0]), 0.0);
        assert_eq!(g2_auto_from(&one, &[0.0]), Err(Error::ZeroPhotonNumber));
        assert_eq!(g2_cross_from(&one, &one, &[0.0], &[1.0]), Err(Error::ZeroPhotonNumber));
    }

    #[test]
    fn zero_coefficients_ignored() {
        let coeffs = [Complex64::new(0.6, 0.2), Complex64::new(0.0, 0.0), Complex64::new(0.1, -0.3)];
        assert_eq!(g2_auto_from(&coeffs, &[1.0, 5.0, 0.5]).unwrap(), 2.0);
    }
}
