mod common;

use common::*;
use num_complex::Complex64;
use pdc_modes::fiber::{first_mode_overlap, intrinsic_loss, project, FiberMode};
use pdc_modes::grid::build_grid;
use pdc_modes::schmidt::{decompose, schmidt_number};
use pdc_modes::tpa::{tpa_double_gauss, DoubleGauss};

const RATIOS: [f64; 4] = [0.1, 0.3, 0.5, 0.7];
const FLOOR: f64 = 1e-5;

#[test]
fn eigenvalues_match_closed_form() {
    for mu in RATIOS {
        let (dg, dec) = double_gauss_decomposition(mu, 128, 1e-9);
        let mut expected = 0;
        for order in 0.. {
            let level = (1.0 - mu).powi(2) * mu.powi(order);
            if level < FLOOR {
                break;
            }
            for n in -order..=order {
                if (order - n.abs()) % 2 != 0 {
                    continue;
                }
                let m = ((order - n.abs()) / 2) as usize;
                let got = dec.eigenvalue(m, n).unwrap_or_else(|| panic!("mu {mu}: missing ({m}, {n})"));
                assert!((got - level).abs() < 1e-6, "mu {mu} ({m},{n}): {got} vs {level}");
                assert!((dg.eigenvalue(m, n) - level).abs() < 1e-15);
                expected += 1;
            }
        }
        let above = dec.modes().iter().filter(|x| x.lambda > FLOOR).count();
        assert_eq!(above, expected, "mu {mu}: spurious modes above the floor");
    }
}

#[test]
fn half_ratio_reference_values() {
    let (_, dec) = double_gauss_decomposition(0.5, 96, 1e-9);
    assert!((dec.eigenvalue(0, 0).unwrap() - 0.25).abs() < 1e-6);
    assert!((dec.eigenvalue(0, 1).unwrap() - 0.125).abs() < 1e-6);
    assert!((dec.eigenvalue(0, -1).unwrap() - 0.125).abs() < 1e-6);
    assert!((dec.eigenvalue(1, 0).unwrap() - 0.0625).abs() < 1e-6);
    // K = (1 + mu)^2 / (1 - mu)^2 for the full two-dimensional spectrum
    let k = dec.schmidt_number().unwrap();
    assert!((k - 9.0).abs() < 1e-3, "K = {k}");
}

#[test]
fn radial_modes_are_laguerre_gauss() {
    for mu in RATIOS {
        let (dg, dec) = double_gauss_decomposition(mu, 128, 1e-9);
        let w0 = dg.first_mode_waist();
        for mode in dec.modes().iter().filter(|x| x.lambda > FLOOR) {
            let oracle: Vec<Complex64> = laguerre_gauss_radial(dec.grid(), mode.m, mode.n, w0)
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect();
            let err = phase_aligned_distance(dec.grid(), &oracle, &mode.u);
            assert!(err < 1e-4, "mu {mu} ({},{}): L2 error {err}", mode.m, mode.n);
        }
    }
}

#[test]
fn signal_and_idler_modes_coincide() {
    let (_, dec) = double_gauss_decomposition(0.5, 96, 1e-9);
    for mode in dec.modes() {
        let overlap = inner(dec.grid(), &mode.u, &mode.v).norm();
        assert!((overlap - 1.0).abs() < 1e-8, "({},{}): {overlap}", mode.m, mode.n);
        assert!(phase_aligned_distance(dec.grid(), &mode.u, &mode.v) < 1e-8);
    }
}

#[test]
fn separable_kernel_is_a_product_state() {
    let g = build_grid(12.0, 64, 16).unwrap();
    let dec = decompose(&tpa_double_gauss(&g, 2.0, 2.0).unwrap(), 1e-12).unwrap();
    assert_eq!(dec.modes().len(), 1);
    assert!((dec.modes()[0].lambda - 1.0).abs() < 1e-12);
    assert_eq!(schmidt_number(&dec.eigenvalues()).unwrap(), 1.0);
}

#[test]
fn matched_fiber_captures_everything() {
    // exp(-(q_s^2 + q_i^2) / 4) has first mode exp(-q^2 / 2 w^2) with w = sqrt(2)
    let g = build_grid(14.0, 64, 16).unwrap();
    let dec = decompose(&tpa_double_gauss(&g, 2.0, 2.0).unwrap(), 1e-12).unwrap();
    let fiber = FiberMode::new(&g, 2f64.sqrt()).unwrap();
    let report = project(&fiber, &dec).unwrap();
    let c00 = report.c[dec.mode_index(0, 0).unwrap()];
    assert!((c00 - Complex64::new(1.0, 0.0)).norm() < 1e-8, "C00 = {c00}");
    assert!((report.captured_fraction - 1.0).abs() < 1e-8);
    assert!(report.loss00.unwrap().abs() < 1e-8);
}

#[test]
fn first_mode_overlap_is_two_gaussian_overlap() {
    let (dg, dec) = double_gauss_decomposition(0.3, 128, 1e-9);
    let w0 = dg.first_mode_waist();
    for ratio in [0.3, 0.5, 0.8, 1.0, 1.25, 2.0, 3.0] {
        let w = ratio * w0;
        let c00 = 2.0 * w * w0 / (w * w + w0 * w0);
        let got = first_mode_overlap(&dec, w).unwrap();
        assert!((got - c00 * c00).abs() < 1e-8, "w/w0 {ratio}: {got} vs {}", c00 * c00);
    }
}

#[test]
fn gaussian_first_mode_has_no_intrinsic_loss() {
    for mu in [0.1, 0.5] {
        let (dg, dec) = double_gauss_decomposition(mu, 128, 1e-9);
        let est = intrinsic_loss(&dec).unwrap();
        assert!(est.loss < 1e-6, "mu {mu}: loss {}", est.loss);
        assert!((est.waist / dg.first_mode_waist() - 1.0).abs() < 1e-3);
    }
}

#[test]
fn kernel_parameters_roundtrip() {
    for mu in RATIOS {
        let dg = DoubleGauss::from_eigenvalue_ratio(mu, 2.5).unwrap();
        assert!((dg.eigenvalue_ratio() - mu).abs() < 1e-12);
        assert!((dg.first_mode_waist() - 2.5).abs() < 1e-12);
        assert!(dg.sigma_plus > dg.sigma_minus);
    }
    assert!(DoubleGauss::from_eigenvalue_ratio(1.0, 1.0).is_err());
    assert!(DoubleGauss::new(-1.0, 1.0).is_err());
}

#[test]
fn double_gauss_is_real_and_non_negative() {
    let g = build_grid(6.0, 24, 16).unwrap();
    let f = tpa_double_gauss(&g, 3.0, 0.7).unwrap();
    assert!(f.values().iter().all(|v| v.im == 0.0 && v.re >= 0.0));
    assert!((f.weighted_norm_sq() - 1.0).abs() < 1e-10);
}
