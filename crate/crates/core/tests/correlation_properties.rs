mod common;

use common::*;
use num_complex::Complex64;
use pdc_modes::correlations::{correlations, g2_auto_from, g2_cross, g2_cross_from, photon_number};
use pdc_modes::fiber::{coupling_efficiency, project, FiberMode};
use pdc_modes::gain::apply_gain;
use proptest::prelude::*;

fn coefficient() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn autocorrelation_is_thermal(
        terms in proptest::collection::vec((coefficient(), 0.01f64..20.0), 1..30),
    ) {
        let c: Vec<Complex64> = terms.iter().map(|t| t.0).collect();
        let s: Vec<f64> = terms.iter().map(|t| t.1).collect();
        prop_assume!(photon_number(&c, &s) > 1e-12);
        prop_assert_eq!(g2_auto_from(&c, &s).unwrap(), 2.0);
    }

    #[test]
    fn cross_correlation_at_least_one(
        terms in proptest::collection::vec((coefficient(), coefficient(), 0.0f64..5.0), 1..30),
    ) {
        let c: Vec<Complex64> = terms.iter().map(|t| t.0).collect();
        let d: Vec<Complex64> = terms.iter().map(|t| t.1).collect();
        let x: Vec<f64> = terms.iter().map(|t| t.2).collect();
        let s: Vec<f64> = x.iter().map(|x| x.sinh()).collect();
        let ch: Vec<f64> = x.iter().map(|x| x.cosh()).collect();
        prop_assume!(photon_number(&c, &s) > 1e-12 && photon_number(&d, &s) > 1e-12);
        prop_assert!(g2_cross_from(&c, &d, &s, &ch).unwrap() >= 1.0);
        // identical in-phase coefficient sets bunch at least as strongly as a thermal field
        let real: Vec<Complex64> = c.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
        prop_assert!(g2_cross_from(&real, &real, &s, &ch).unwrap() >= 2.0 - 1e-12);
    }
}

#[test]
fn matched_single_mode_cross_correlation() {
    let one = [Complex64::new(1.0, 0.0)];
    for lambda in [0.05, 0.3, 1.0] {
        for g in [0.5, 1.0, 5.0, 22.8] {
            let x = g * f64::sqrt(lambda);
            let expected = 2.0 + 1.0 / x.sinh().powi(2);
            let got = g2_cross_from(&one, &one, &[x.sinh()], &[x.cosh()]).unwrap();
            assert!((got - expected).abs() < 1e-10 * expected);
        }
    }
}

#[test]
fn photon_number_two_forms_agree() {
    let dec = small_two_crystal(&modest_pump(), 0.25, 48);
    let spec = apply_gain(&dec, 10.0).unwrap();
    let w0 = pdc_modes::fiber::first_mode_moment_width(&dec).unwrap();
    let report = project(&FiberMode::new(dec.grid(), w0).unwrap(), &dec).unwrap();
    let res = correlations(&report, &spec).unwrap();
    let second = spec.total_photons * coupling_efficiency(&report, &spec).unwrap();
    assert!((res.n_s - second).abs() < 1e-12 * res.n_s);
    assert_eq!(res.g2_ss, 2.0);
    assert!(res.g2_si > 1.0);
    let vacuum = apply_gain(&dec, 0.0).unwrap();
    assert!(correlations(&report, &vacuum).is_err());
}

#[test]
fn cross_correlation_minimum_at_best_coupling() {
    let (dg, dec) = double_gauss_decomposition(0.5, 96, 1e-9);
    let spec = apply_gain(&dec, 3.0).unwrap();
    let ratios: Vec<f64> = (0..121).map(|i| 0.3 + 2.7 * i as f64 / 120.0).collect();
    let mut best_t = (0.0, 0.0);
    let mut best_g2 = (f64::INFINITY, 0.0);
    for r in ratios {
        let report = project(&FiberMode::new(dec.grid(), r * dg.first_mode_waist()).unwrap(), &dec).unwrap();
        let t = coupling_efficiency(&report, &spec).unwrap();
        let g2 = g2_cross(&report, &spec).unwrap();
        if t > best_t.0 {
            best_t = (t, r);
        }
        if g2 < best_g2.0 {
            best_g2 = (g2, r);
        }
    }
    assert!((best_t.1 - best_g2.1).abs() < 0.03, "{best_t:?} {best_g2:?}");
    assert!((best_t.1 - 1.0).abs() < 0.03);
}
