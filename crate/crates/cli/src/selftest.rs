//! Built-in oracle checks, runnable from the command line.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdc_modes::correlations::{g2_auto_from, g2_cross_from, AUTO_IDENTITY_TOL};
use pdc_modes::fiber::{coupling_efficiency, project, FiberMode};
use pdc_modes::gain::apply_gain;
use pdc_modes::grid::{build_grid, MAX_AZIMUTHAL_SAMPLES};
use pdc_modes::schmidt::decompose_refining;
use pdc_modes::tpa::DoubleGauss;
use pdc_modes::SchmidtDecomposition;

const SEED: u64 = 0x5eed;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, err.to_string())
    }
}

fn double_gauss(mu: f64) -> pdc_modes::Result<(DoubleGauss, SchmidtDecomposition)> {
    let dg = DoubleGauss::from_eigenvalue_ratio(mu, 1.0)?;
    let q_max = dg.suggested_q_max(1e-12);
    let dec = decompose_refining(|n_phi| dg.field(&build_grid(q_max, 128, n_phi)?), 32, MAX_AZIMUTHAL_SAMPLES, 1e-9)?;
    Ok((dg, dec))
}

fn quadrature_checks() -> Vec<Check> {
    let mut out = Vec::new();
    match build_grid(2.0, 64, 16) {
        Ok(grid) => {
            let len = grid.integrate_dq(|_| 1.0);
            out.push(Check::new("quadrature: int dq", (len - 2.0).abs() < 1e-12, format!("{len}")));
            let area = grid.integrate_qdq(|_| 1.0);
            out.push(Check::new("quadrature: int q dq", (area - 2.0).abs() < 1e-12, format!("{area}")));
            let gauss = grid.integrate_qdq(|q| (-q * q).exp());
            let exact = 0.5 * (1.0 - (-4.0f64).exp());
            out.push(Check::new(
                "quadrature: int q exp(-q^2) dq",
                (gauss - exact).abs() < 1e-12,
                format!("{gauss} vs {exact}"),
            ));
        }
        Err(e) => out.push(Check::failed("quadrature", e)),
    }
    out
}

fn double_gauss_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for mu in [0.1, 0.3, 0.5, 0.7] {
        let name = format!("double-Gauss oracle mu = {mu}");
        let (dg, dec) = match double_gauss(mu) {
            Ok(x) => x,
            Err(e) => {
                out.push(Check::failed(name, e));
                continue;
            }
        };
        let mut worst = 0.0f64;
        let mut missing = 0;
        for m in 0..40usize {
            for n in -40i32..=40 {
                let level = dg.eigenvalue(m, n);
                if level < 1e-5 {
                    continue;
                }
                match dec.eigenvalue(m, n) {
                    Some(got) => worst = worst.max((got - level).abs()),
                    None => missing += 1,
                }
            }
        }
        out.push(Check::new(
            name,
            worst < 1e-6 && missing == 0,
            format!("max |error| {worst:.2e}, {missing} missing"),
        ));

        let mut ortho = 0.0f64;
        let grid = dec.grid();
        let modes = dec.modes();
        for a in modes.iter().take(12) {
            for b in modes.iter().take(12).filter(|b| b.n == a.n) {
                let dot: Complex64 = a
                    .u
                    .iter()
                    .zip(&b.u)
                    .zip(grid.q_weights())
                    .map(|((x, y), w)| x.conj() * y * *w)
                    .sum();
                let target = if a.m == b.m { 1.0 } else { 0.0 };
                ortho = ortho.max((dot - target).norm());
            }
        }
        out.push(Check::new(
            format!("orthonormality mu = {mu}"),
            ortho < 1e-8,
            format!("max residual {ortho:.2e}"),
        ));

        let sum: f64 = dec.eigenvalues().iter().sum::<f64>() + dec.truncated_weight();
        out.push(Check::new(
            format!("sum rule mu = {mu}"),
            (sum - 1.0).abs() < 1e-9,
            format!("{sum}"),
        ));
    }
    out
}

fn g2_checks() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let len = rng.gen_range(1..=12);
        let coeffs: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let s: Vec<f64> = (0..len).map(|_| rng.gen_range(0.01..5.0)).collect();
        match g2_auto_from(&coeffs, &s) {
            Ok(g) => worst = worst.max((g - 2.0).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    let mut out = vec![Check::new(
        "g2_auto = 2 over 50 random draws",
        worst <= AUTO_IDENTITY_TOL,
        format!("max |g2 - 2| {worst:.2e}"),
    )];

    let lambda = 0.25f64;
    for gain in [0.5, 1.0, 5.0, 22.8] {
        let x = gain * lambda.sqrt();
        let (s, c) = (x.sinh(), x.cosh());
        let one = [Complex64::new(1.0, 0.0)];
        let expected = 2.0 + 1.0 / (s * s);
        let check = match g2_cross_from(&one, &one, &[s], &[c]) {
            Ok(g) => Check::new(
                format!("matched-mode g2_si at G = {gain}"),
                (g - expected).abs() < 1e-10,
                format!("{g} vs {expected}"),
            ),
            Err(e) => Check::failed(format!("matched-mode g2_si at G = {gain}"), e),
        };
        out.push(check);
    }
    out
}

fn fiber_checks() -> Vec<Check> {
    let name = "T <= lambda'_00 over 200 random waists";
    let (dg, dec) = match double_gauss(0.5) {
        Ok(x) => x,
        Err(e) => return vec![Check::failed(name, e)],
    };
    let spectrum = match apply_gain(&dec, 5.0) {
        Ok(s) => s,
        Err(e) => return vec![Check::failed(name, e)],
    };
    let bound = spectrum.first_lambda_prime().unwrap_or(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let w0 = dg.first_mode_waist();
    let mut worst = f64::NEG_INFINITY;
    let mut captured = 0.0f64;
    let mut off_axis = 0.0f64;
    for _ in 0..200 {
        let waist = w0 * rng.gen_range(0.1f64..10.0);
        let result = FiberMode::new(dec.grid(), waist)
            .and_then(|f| project(&f, &dec))
            .and_then(|r| Ok((coupling_efficiency(&r, &spectrum)?, r)));
        match result {
            Ok((t, report)) => {
                worst = worst.max(t - bound);
                captured = captured.max(report.captured_fraction);
                for (mode, c) in dec.modes().iter().zip(&report.c) {
                    if mode.n != 0 {
                        off_axis = off_axis.max(c.norm());
                    }
                }
            }
            Err(e) => return vec![Check::failed(name, e)],
        }
    }
    vec![
        Check::new(name, worst <= 1e-10, format!("max T - lambda'_00 = {worst:.2e}")),
        Check::new("sum |C|^2 <= 1", captured <= 1.0 + 1e-10, format!("max {captured}")),
        Check::new("n != 0 projections vanish", off_axis < 1e-12, format!("max |C| {off_axis:.2e}")),
    ]
}

pub fn run_selftest() -> Vec<Check> {
    let mut checks = quadrature_checks();
    checks.extend(double_gauss_checks());
    checks.extend(g2_checks());
    checks.extend(fiber_checks());
    checks
}
