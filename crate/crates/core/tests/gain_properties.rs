mod common;

use common::*;
use pdc_modes::gain::{apply_gain, renormalize_eigenvalues, MAX_SQUEEZING};
use pdc_modes::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn renormalized_spectrum_invariants(
        raw in proptest::collection::vec(1e-6f64..1.0, 1..40),
        gain in 0.0f64..200.0,
    ) {
        let total: f64 = raw.iter().sum();
        let mut lambdas: Vec<f64> = raw.iter().map(|x| x / total).collect();
        lambdas.sort_by(|a, b| b.total_cmp(a));
        let lp = renormalize_eigenvalues(&lambdas, gain);
        prop_assert!((lp.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(lp.windows(2).all(|p| p[0] >= p[1]));
        prop_assert!(lp.iter().all(|x| x.is_finite() && *x >= 0.0));
    }
}

#[test]
fn bogolyubov_coefficients() {
    let dec = small_two_crystal(&modest_pump(), 0.25, 48);
    for g in [0.0, 0.5, 5.0, 22.8, 100.0] {
        let spec = apply_gain(&dec, g).unwrap();
        let lp_sum: f64 = spec.modes.iter().map(|m| m.lambda_prime).sum();
        assert!((lp_sum - 1.0).abs() < 1e-10);
        for m in &spec.modes {
            assert!((m.c * m.c - m.s * m.s - 1.0).abs() < 1e-12 * m.c * m.c);
            assert_eq!(m.photons, m.s * m.s);
            if g > 0.0 {
                assert!((m.photons - spec.total_photons * m.lambda_prime).abs() < 1e-10 * m.photons.max(1e-300));
            }
        }
        for p in spec.modes.windows(2) {
            if p[0].lambda > p[1].lambda {
                assert!(p[0].lambda_prime >= p[1].lambda_prime * (1.0 - 1e-12));
            }
        }
    }
}

#[test]
fn small_gain_recovers_low_gain_spectrum() {
    let dec = small_two_crystal(&modest_pump(), 0.25, 48);
    let spec = apply_gain(&dec, 1e-4).unwrap();
    let sum: f64 = dec.eigenvalues().iter().sum();
    for (m, l) in spec.modes.iter().zip(dec.eigenvalues()) {
        assert!((m.lambda_prime - l / sum).abs() < 1e-6);
    }
}

#[test]
fn single_mode_stays_single() {
    let (_, dec) = double_gauss_decomposition(0.0, 48, 1e-9);
    assert_eq!(dec.modes().len(), 1);
    for g in [0.1, 3.0, 50.0] {
        let spec = apply_gain(&dec, g).unwrap();
        assert_eq!(spec.first_lambda_prime(), Some(1.0));
        assert_eq!(spec.k_prime, 1.0);
    }
}

#[test]
fn overflow_guard() {
    let (_, dec) = double_gauss_decomposition(0.0, 48, 1e-9);
    assert!(matches!(apply_gain(&dec, 2.0 * MAX_SQUEEZING), Err(Error::GainOverflow(_))));
    assert!(apply_gain(&dec, -1.0).is_err());
    // the renormalized eigenvalues alone stay finite far beyond the guard
    let lp = renormalize_eigenvalues(&[0.5, 0.3, 0.2], 1e4);
    assert!(lp.iter().all(|x| x.is_finite()));
}
