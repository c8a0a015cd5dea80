//! Default two-crystal geometry on the default grid. The heavy grids are
//! built one at a time.

mod common;

use std::sync::{Mutex, OnceLock};

use pdc_modes::gain::apply_gain;
use pdc_modes::grid::{build_grid, default_q_max, DEFAULT_AZIMUTHAL_SAMPLES, DEFAULT_RADIAL_NODES, MAX_AZIMUTHAL_SAMPLES};
use pdc_modes::params::derive_wavenumbers;
use pdc_modes::schmidt::{assemble_full_mode, azimuthal_decompose, decompose_refining, DEFAULT_TRUNCATION};
use pdc_modes::tpa::{internal_angle, pump_envelope_coefficient, tpa_two_crystal, two_crystal_radial_factor};
use pdc_modes::{PdcParams, SchmidtDecomposition};

static HEAVY: Mutex<()> = Mutex::new(());

fn run(n_q: usize, qmax_scale: f64) -> SchmidtDecomposition {
    let params = PdcParams::default();
    let q_max = default_q_max(&params).unwrap() * qmax_scale;
    decompose_refining(
        |n_phi| tpa_two_crystal(&build_grid(q_max, n_q, n_phi)?, &params),
        DEFAULT_AZIMUTHAL_SAMPLES,
        MAX_AZIMUTHAL_SAMPLES,
        DEFAULT_TRUNCATION,
    )
    .unwrap()
}

fn default_run() -> &'static SchmidtDecomposition {
    static DEC: OnceLock<SchmidtDecomposition> = OnceLock::new();
    DEC.get_or_init(|| {
        let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
        run(DEFAULT_RADIAL_NODES, 1.0)
    })
}

#[test]
fn amplitude_at_cutoff_is_negligible() {
    let params = PdcParams::default();
    let wn = derive_wavenumbers(&params).unwrap();
    let theta = internal_angle(default_q_max(&params).unwrap(), &wn).unwrap();
    let beta = pump_envelope_coefficient(&params, &wn);
    let peak = two_crystal_radial_factor(0.0, 0.0, &wn, &params).norm();
    let edge = two_crystal_radial_factor(theta, theta, &wn, &params).norm();
    let worst = (0..720)
        .map(|k| {
            let c = (k as f64 * std::f64::consts::PI / 360.0).cos();
            edge * (-2.0 * beta * theta * theta * (1.0 + c)).exp()
        })
        .fold(0.0, f64::max);
    assert!(worst / peak < 1e-3, "{}", worst / peak);
}

#[test]
fn radial_refinement_converges() {
    let base = default_run();
    let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let fine = run(384, 1.0);
    let coarse = run(192, 1.0);
    let l_base = base.eigenvalue(0, 0).unwrap();
    assert!((fine.eigenvalue(0, 0).unwrap() - coarse.eigenvalue(0, 0).unwrap()).abs() < 1e-4);
    assert!((fine.eigenvalue(0, 0).unwrap() - l_base).abs() < 1e-4);
    let k_base = base.schmidt_number().unwrap();
    let k_fine = fine.schmidt_number().unwrap();
    assert!((k_fine / k_base - 1.0).abs() < 5e-3, "K {k_base} -> {k_fine}");
}

#[test]
fn first_eigenvalue_converges_with_cutoff() {
    // The sinc tail carries weight falling off as 1/q_max^2, so each doubling
    // of the cutoff shrinks the change in lambda_00 roughly fourfold.
    let full = default_run().eigenvalue(0, 0).unwrap();
    let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let half = run(DEFAULT_RADIAL_NODES, 0.5).eigenvalue(0, 0).unwrap();
    let quarter = run(DEFAULT_RADIAL_NODES, 0.25).eigenvalue(0, 0).unwrap();
    let first = quarter - half;
    let second = half - full;
    assert!(first > 0.0 && second > 0.0);
    assert!(second < 2e-3, "{second}");
    let rate = first / second;
    assert!((3.0..8.0).contains(&rate), "contraction {rate}");
}

#[test]
fn symmetric_order_weight() {
    let params = PdcParams::default();
    let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let grid = build_grid(default_q_max(&params).unwrap(), DEFAULT_RADIAL_NODES, 512).unwrap();
    let blocks = azimuthal_decompose(&tpa_two_crystal(&grid, &params).unwrap()).unwrap();
    let fraction = blocks.order_weight(0).unwrap() / blocks.total_weight();
    assert!((fraction - 0.08773).abs() < 1e-4, "{fraction}");
}

#[test]
fn gain_compresses_the_spectrum() {
    let dec = default_run();
    let mut last_k = f64::INFINITY;
    let mut last_l = 0.0;
    for g in [0.0, 5.0, 10.0, 22.8] {
        let spec = apply_gain(dec, g).unwrap();
        let l00 = spec.first_lambda_prime().unwrap();
        assert!(spec.k_prime <= last_k, "K' rose at G = {g}");
        assert!(l00 >= last_l, "lambda'_00 fell at G = {g}");
        last_k = spec.k_prime;
        last_l = l00;
    }
    let low = apply_gain(dec, 0.0).unwrap();
    assert!((low.k_prime - dec.schmidt_number().unwrap() * (1.0 - dec.truncated_weight()).powi(2)).abs() < 1e-9 * low.k_prime);
}

#[test]
fn first_mode_divergence() {
    let dec = default_run();
    let wn = derive_wavenumbers(&PdcParams::default()).unwrap();
    let full = assemble_full_mode(dec, 0, 0).unwrap();
    assert!((full.norm_sq() - 1.0).abs() < 1e-8);
    let divergence = full.intensity_fwhm().unwrap() / wn.k0_air;
    assert!((divergence / 6e-3 - 1.0).abs() < 0.25, "{divergence}");
}
