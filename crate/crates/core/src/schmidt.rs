//! Schmidt decomposition of a polar two-photon amplitude.
//!
//! The amplitude is first expanded in azimuthal harmonics of the
//! difference angle, `F = sum_n chi_n(q_s, q_i) e^{i n dphi}`. Each
//! harmonic is then decomposed by an SVD of the weighted matrix
//! `chi_n(q_a, q_b) sqrt(q_a w_a) sqrt(q_b w_b) sqrt(2 pi)`, whose Frobenius
//! norm reproduces the continuous `q dq` measure. Singular vectors divided
//! by `sqrt(w)` sample the radial functions `u~_{mn}(q)`, orthonormal under
//! `int dq`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::PolarGrid;
use crate::tpa::TpaField;

/// Weight allowed above the retained azimuthal orders.
pub const AZIMUTHAL_TAIL: f64 = 1e-8;

pub const DEFAULT_TRUNCATION: f64 = 1e-6;

/// Relative difference under which `chi_n` and `chi_{-n}` count as equal.
const MIRROR_TOL: f64 = 1e-12;

/// Azimuthal Fourier coefficients `chi_n` for `n` in `[-n_max, n_max]`.
#[derive(Debug, Clone)]
pub struct AzimuthalBlocks {
    n_max: usize,
    blocks: Vec<Mat<Complex64>>,
    order_weights: Vec<f64>,
    tail_weight: f64,
    grid: PolarGrid,
}

impl AzimuthalBlocks {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn orders(&self) -> impl Iterator<Item = i32> {
        let n = self.n_max as i32;
        -n..=n
    }

    pub fn block(&self, n: i32) -> Option<&Mat<Complex64>> {
        let idx = n + self.n_max as i32;
        usize::try_from(idx).ok().and_then(|i| self.blocks.get(i))
    }

    /// `2 pi sum w_a w_b q_a q_b |chi_n|^2`.
    pub fn order_weight(&self, n: i32) -> Option<f64> {
        let idx = n + self.n_max as i32;
        usize::try_from(idx).ok().and_then(|i| self.order_weights.get(i).copied())
    }

    /// Parseval sum over retained orders.
    pub fn total_weight(&self) -> f64 {
        self.order_weights.iter().sum()
    }

    /// Weight carried by the discarded orders.
    pub fn tail_weight(&self) -> f64 {
        self.tail_weight
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }
}

fn block_weight(block: &Mat<Complex64>, grid: &PolarGrid) -> f64 {
    let q = grid.q_nodes();
    let w = grid.q_weights();
    let mut total = 0.0;
    for j in 0..grid.n_q() {
        for i in 0..grid.n_q() {
            total += w[i] * w[j] * q[i] * q[j] * block[(i, j)].norm_sqr();
        }
    }
    2.0 * PI * total
}

pub fn azimuthal_decompose(tpa: &TpaField) -> Result<AzimuthalBlocks> {
    let grid = tpa.grid();
    let n_q = grid.n_q();
    let n_phi = grid.n_phi();
    let scale = 1.0 / n_phi as f64;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_phi);
    let q = grid.q_nodes();
    let w = grid.q_weights();
    let values = tpa.values();

    // Transform one signal node's rows; `visit(j, spectrum)` sees each idler row.
    let transform_row = |i: usize, visit: &mut dyn FnMut(usize, &[Complex64])| {
        let mut buf = vec![Complex64::new(0.0, 0.0); n_phi];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for j in 0..n_q {
            let start = (i * n_q + j) * n_phi;
            buf.copy_from_slice(&values[start..start + n_phi]);
            fft.process_with_scratch(&mut buf, &mut scratch);
            buf.iter_mut().for_each(|c| *c *= scale);
            visit(j, &buf);
        }
    };

    // First pass: weight per FFT bin, summed in a fixed order.
    let partial: Vec<Vec<f64>> = (0..n_q)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; n_phi];
            transform_row(i, &mut |j, spec| {
                let f = 2.0 * PI * w[i] * w[j] * q[i] * q[j];
                for (a, c) in acc.iter_mut().zip(spec) {
                    *a += f * c.norm_sqr();
                }
            });
            acc
        })
        .collect();
    let mut bin_weights = vec![0.0; n_phi];
    for acc in &partial {
        for (b, a) in bin_weights.iter_mut().zip(acc) {
            *b += a;
        }
    }
    let total: f64 = bin_weights.iter().sum();

    let bin = |n: i32| -> usize { n.rem_euclid(n_phi as i32) as usize };
    let limit = grid.max_azimuthal_order();
    let mut retained = bin_weights[0];
    let mut n_max = None;
    for n in 0..=limit {
        if n > 0 {
            retained += bin_weights[bin(n as i32)] + bin_weights[bin(-(n as i32))];
        }
        if total - retained < AZIMUTHAL_TAIL * total {
            n_max = Some(n);
            break;
        }
    }
    let n_max = n_max.ok_or(Error::NyquistViolation {
        n_phi,
        n_max: limit,
        tail: (total - retained) / total,
    })?;

    // Second pass: scatter the retained bins into the blocks, a few signal
    // nodes at a time to bound the transient memory.
    let orders: Vec<usize> = (-(n_max as i32)..=n_max as i32).map(bin).collect();
    let mut blocks: Vec<Mat<Complex64>> = (0..orders.len())
        .map(|_| Mat::zeros(n_q, n_q))
        .collect();
    let batch = rayon::current_num_threads().max(1) * 4;
    for start in (0..n_q).step_by(batch) {
        let rows: Vec<Vec<Complex64>> = (start..(start + batch).min(n_q))
            .into_par_iter()
            .map(|i| {
                let mut row = vec![Complex64::new(0.0, 0.0); orders.len() * n_q];
                transform_row(i, &mut |j, spec| {
                    for (o, &k) in orders.iter().enumerate() {
                        row[o * n_q + j] = spec[k];
                    }
                });
                row
            })
            .collect();
        for (offset, row) in rows.iter().enumerate() {
            for (o, block) in blocks.iter_mut().enumerate() {
                for j in 0..n_q {
                    block[(start + offset, j)] = row[o * n_q + j];
                }
            }
        }
    }
    let order_weights = blocks.iter().map(|b| block_weight(b, grid)).collect();

    Ok(AzimuthalBlocks {
        n_max,
        blocks,
        order_weights,
        tail_weight: total - retained,
        grid: grid.clone(),
    })
}

/// One signal/idler Schmidt pair.
#[derive(Debug, Clone)]
pub struct SchmidtMode {
    /// Radial index within the azimuthal order.
    pub m: usize,
    /// Azimuthal order.
    pub n: i32,
    /// Normalized eigenvalue.
    pub lambda: f64,
    /// Signal radial function `u~_{mn}` on the grid nodes.
    pub u: Vec<Complex64>,
    /// Idler radial function `v~_{mn}` on the grid nodes.
    pub v: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    grid: PolarGrid,
    modes: Vec<SchmidtMode>,
    truncation_threshold: f64,
    truncated_weight: f64,
    raw_weight: f64,
}

impl SchmidtDecomposition {
    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    /// Retained modes, sorted by decreasing eigenvalue.
    pub fn modes(&self) -> &[SchmidtMode] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn mode(&self, m: usize, n: i32) -> Option<&SchmidtMode> {
        self.modes.iter().find(|x| x.m == m && x.n == n)
    }

    pub fn mode_index(&self, m: usize, n: i32) -> Option<usize> {
        self.modes.iter().position(|x| x.m == m && x.n == n)
    }

    pub fn eigenvalue(&self, m: usize, n: i32) -> Option<f64> {
        self.mode(m, n).map(|x| x.lambda)
    }

    pub fn truncation_threshold(&self) -> f64 {
        self.truncation_threshold
    }

    /// Sum of the eigenvalues dropped below the threshold.
    pub fn truncated_weight(&self) -> f64 {
        self.truncated_weight
    }

    /// Sum of squared singular values before renormalization.
    pub fn raw_weight(&self) -> f64 {
        self.raw_weight
    }

    pub fn schmidt_number(&self) -> Result<f64> {
        schmidt_number(&self.eigenvalues())
    }

    /// Singular value of mode `(m, n)` in the weighted block.
    pub fn singular_value(&self, mode: &SchmidtMode) -> f64 {
        (mode.lambda * self.raw_weight).sqrt()
    }
}

/// Weighted block `chi_n(q_a, q_b) sqrt(q_a w_a) sqrt(q_b w_b) sqrt(2 pi)`.
pub fn weighted_block(chi: &Mat<Complex64>, grid: &PolarGrid) -> Mat<Complex64> {
    let s: Vec<f64> = grid
        .q_nodes()
        .iter()
        .zip(grid.q_weights())
        .map(|(&q, &w)| (q * w).sqrt())
        .collect();
    let root_2pi = (2.0 * PI).sqrt();
    Mat::from_fn(chi.nrows(), chi.ncols(), |i, j| chi[(i, j)] * (s[i] * s[j] * root_2pi))
}

struct RawMode {
    m: usize,
    n: i32,
    sigma_sq: f64,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

fn decompose_order(
    n: i32,
    chi: &Mat<Complex64>,
    grid: &PolarGrid,
) -> Result<Vec<RawMode>> {
    let weighted = weighted_block(chi, grid);
    let svd = weighted.svd().map_err(|_| Error::SvdFailure { order: n })?;
    let (u, v) = (svd.U(), svd.V());
    let sigmas: Vec<f64> = svd.S().column_vector().iter().map(|s| s.re).collect();
    let mut order: Vec<usize> = (0..sigmas.len()).collect();
    order.sort_by(|&a, &b| sigmas[b].total_cmp(&sigmas[a]));

    let inv_sqrt_w: Vec<f64> = grid.q_weights().iter().map(|w| 1.0 / w.sqrt()).collect();
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(m, col)| {
            let sigma = sigmas[col];
            let mut uu: Vec<Complex64> = (0..grid.n_q())
                .map(|i| u[(i, col)] * inv_sqrt_w[i])
                .collect();
            let mut vv: Vec<Complex64> = (0..grid.n_q())
                .map(|j| v[(j, col)].conj() * inv_sqrt_w[j])
                .collect();
            // Rotate u real-positive at its peak; v takes the opposite phase
            // so that sigma u v is unchanged.
            let peak = uu
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let phase = if uu[peak].norm() > 0.0 {
                uu[peak] / uu[peak].norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            let conj = phase.conj();
            uu.iter_mut().for_each(|x| *x *= conj);
            vv.iter_mut().for_each(|x| *x *= phase);
            RawMode {
                m,
                n,
                sigma_sq: sigma * sigma,
                u: uu,
                v: vv,
            }
        })
        .collect())
}

/// Whether `chi_{n}` equals `chi_{-n}` to rounding, so the SVD of `-n` can
/// be copied from `n`.
fn mirrors(blocks: &AzimuthalBlocks, n: i32) -> bool {
    let (Some(a), Some(b)) = (blocks.block(n), blocks.block(-n)) else {
        return false;
    };
    let mut scale: f64 = 0.0;
    let mut diff: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            scale = scale.max(a[(i, j)].norm());
            diff = diff.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    diff <= MIRROR_TOL * scale
}

/// Deterministic ordering: eigenvalue descending, then `|n|`, then `n >= 0`
/// first, then `m`. Eigenvalues equal to ~13 digits count as ties.
fn ordering_key(lambda: f64, m: usize, n: i32) -> (i64, i32, bool, usize) {
    (-(lambda * 1e13).round() as i64, n.abs(), n < 0, m)
}

pub fn schmidt_decompose(
    blocks: &AzimuthalBlocks,
    grid: &PolarGrid,
    threshold: f64,
) -> Result<SchmidtDecomposition> {
    if blocks.grid() != grid {
        return Err(Error::GridMismatch("azimuthal blocks and grid"));
    }
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "threshold",
            reason: format!("truncation threshold must be >= 0, got {threshold}"),
        });
    }
    // Frobenius norm of each weighted block equals its order weight, so an
    // order lighter than the threshold cannot hold a retained mode.
    let total_weight = blocks.total_weight();
    if !(total_weight > 0.0) {
        return Err(Error::EmptySpectrum);
    }
    let mut skipped_weight = 0.0;
    let mut active = Vec::new();
    let mut mirrored = Vec::new();
    for n in blocks.orders() {
        let weight = blocks.order_weight(n).unwrap_or(0.0);
        if weight / total_weight < threshold {
            skipped_weight += weight;
        } else if n < 0
            && blocks.order_weight(-n).unwrap_or(0.0) / total_weight >= threshold
            && mirrors(blocks, n)
        {
            mirrored.push(-n);
        } else {
            active.push(n);
        }
    }
    let per_order: Vec<Vec<RawMode>> = active
        .par_iter()
        .map(|&n| decompose_order(n, blocks.block(n).expect("order in range"), grid))
        .collect::<Result<_>>()?;

    let mut raw_modes: Vec<RawMode> = Vec::new();
    for (&n, modes) in active.iter().zip(per_order) {
        if mirrored.contains(&n) {
            raw_modes.extend(modes.iter().map(|r| RawMode {
                m: r.m,
                n: -n,
                sigma_sq: r.sigma_sq,
                u: r.u.clone(),
                v: r.v.clone(),
            }));
        }
        raw_modes.extend(modes);
    }

    let raw_weight = raw_modes.iter().map(|r| r.sigma_sq).sum::<f64>() + skipped_weight;
    if !(raw_weight > 0.0) {
        return Err(Error::EmptySpectrum);
    }
    let mut truncated_weight = skipped_weight / raw_weight;
    let mut modes = Vec::new();
    for raw in raw_modes {
        let lambda = raw.sigma_sq / raw_weight;
        if lambda < threshold {
            truncated_weight += lambda;
            continue;
        }
        modes.push(SchmidtMode {
            m: raw.m,
            n: raw.n,
            lambda,
            u: raw.u,
            v: raw.v,
        });
    }
    modes.sort_by_key(|x| ordering_key(x.lambda, x.m, x.n));

    Ok(SchmidtDecomposition {
        grid: grid.clone(),
        modes,
        truncation_threshold: threshold,
        truncated_weight,
        raw_weight,
    })
}

/// Azimuthal expansion followed by the per-order SVD.
pub fn decompose(tpa: &TpaField, threshold: f64) -> Result<SchmidtDecomposition> {
    let blocks = azimuthal_decompose(tpa)?;
    schmidt_decompose(&blocks, tpa.grid(), threshold)
}

/// Builds the amplitude at `n_phi` azimuthal samples and decomposes it,
/// doubling `n_phi` while the azimuthal tail is unresolved, up to `n_phi_limit`.
pub fn decompose_refining<F>(
    build: F,
    n_phi: usize,
    n_phi_limit: usize,
    threshold: f64,
) -> Result<SchmidtDecomposition>
where
    F: Fn(usize) -> Result<TpaField>,
{
    let mut n_phi = n_phi;
    loop {
        let tpa = build(n_phi)?;
        match azimuthal_decompose(&tpa) {
            Ok(blocks) => return schmidt_decompose(&blocks, tpa.grid(), threshold),
            Err(err @ Error::NyquistViolation { .. }) => {
                if 2 * n_phi > n_phi_limit {
                    return Err(err);
                }
                log::info!("{err}; retrying with {} samples", 2 * n_phi);
                n_phi *= 2;
            }
            Err(err) => return Err(err),
        }
    }
}

/// `K = 1 / sum lambda^2`.
pub fn schmidt_number(eigenvalues: &[f64]) -> Result<f64> {
    let s: f64 = eigenvalues.iter().map(|l| l * l).sum();
    if eigenvalues.is_empty() || !(s > 0.0) {
        return Err(Error::EmptySpectrum);
    }
    Ok(1.0 / s)
}

/// A full mode `u_{mn}(q, phi) = u~_{mn}(q) e^{i n phi} / sqrt(2 pi q)`, unit
/// norm under `int q dq dphi`.
#[derive(Debug, Clone)]
pub struct FullMode {
    pub m: usize,
    pub n: i32,
    /// `u~(q) / sqrt(2 pi q)` on the grid nodes.
    pub radial: Vec<Complex64>,
    grid: PolarGrid,
}

impl FullMode {
    pub fn value(&self, i: usize, k: usize) -> Complex64 {
        self.radial[i] * Complex64::from_polar(1.0, self.n as f64 * self.grid.phi(k))
    }

    /// Samples indexed `[i * n_phi + k]` over radial node `i` and azimuth `k`.
    pub fn samples(&self) -> Vec<Complex64> {
        let n_phi = self.grid.n_phi();
        (0..self.grid.n_q() * n_phi)
            .map(|idx| self.value(idx / n_phi, idx % n_phi))
            .collect()
    }

    /// `sum w q |u|^2 dphi` over the polar samples.
    pub fn norm_sq(&self) -> f64 {
        let n_phi = self.grid.n_phi();
        let q = self.grid.q_nodes();
        let w = self.grid.q_weights();
        (0..self.grid.n_q())
            .map(|i| {
                let ring: f64 = (0..n_phi).map(|k| self.value(i, k).norm_sqr()).sum();
                w[i] * q[i] * ring * self.grid.dphi()
            })
            .sum()
    }

    /// Full width at half maximum of `|u|^2` in q, for modes peaked on axis.
    pub fn intensity_fwhm(&self) -> Option<f64> {
        let q = self.grid.q_nodes();
        let intensity: Vec<f64> = self.radial.iter().map(|c| c.norm_sqr()).collect();
        let (peak, &max) = intensity
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        let half = 0.5 * max;
        (peak..q.len() - 1).find_map(|i| {
            if intensity[i] >= half && intensity[i + 1] < half {
                let t = (intensity[i] - half) / (intensity[i] - intensity[i + 1]);
                Some(2.0 * (q[i] + t * (q[i + 1] - q[i])))
            } else {
                None
            }
        })
    }
}

pub fn assemble_full_mode(dec: &SchmidtDecomposition, m: usize, n: i32) -> Result<FullMode> {
    let mode = dec.mode(m, n).ok_or(Error::MissingMode { m, n })?;
    let inv_2pi = 1.0 / (2.0 * PI).sqrt();
    let radial = mode
        .u
        .iter()
        .zip(dec.grid().q_nodes())
        .map(|(u, &q)| u * (inv_2pi / q.sqrt()))
        .collect();
    Ok(FullMode {
        m,
        n,
        radial,
        grid: dec.grid().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::tpa::tpa_double_gauss;

    #[test]
    fn schmidt_number_basics() {
        assert_eq!(schmidt_number(&[1.0]).unwrap(), 1.0);
        let flat = vec![0.1; 10];
        assert!((schmidt_number(&flat).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(schmidt_number(&[]), Err(Error::EmptySpectrum));
    }

    #[test]
    fn symmetric_amplitude_has_only_order_zero() {
        let g = build_grid(5.0, 32, 16).unwrap();
        let f = TpaField::from_fn(&g, |a, b, _| Complex64::new((-a * a - b * b).exp(), 0.0)).unwrap();
        let blocks = azimuthal_decompose(&f).unwrap();
        assert_eq!(blocks.n_max(), 0);
        assert!((blocks.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_amplitude_splits_into_plus_minus_one() {
        let g = build_grid(5.0, 32, 16).unwrap();
        let radial = |a: f64, b: f64| (-a * a - 0.5 * b * b).exp();
        let f = TpaField::from_fn(&g, move |a, b, p| Complex64::new(radial(a, b) * p.cos(), 0.0))
            .unwrap();
        let blocks = azimuthal_decompose(&f).unwrap();
        assert_eq!(blocks.n_max(), 1);
        let zero = blocks.block(0).unwrap();
        for i in 0..g.n_q() {
            for j in 0..g.n_q() {
                assert!(zero[(i, j)].norm() < 1e-15);
            }
        }
        let q = g.q_nodes();
        for n in [-1, 1] {
            let b = blocks.block(n).unwrap();
            for i in 0..g.n_q() {
                for j in 0..g.n_q() {
                    let expect = 0.5 * radial(q[i], q[j]) / f.norm();
                    assert!((b[(i, j)] - expect).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn nyquist_violation_reported() {
        let g = build_grid(5.0, 16, 8).unwrap();
        let f = TpaField::from_fn(&g, |a, b, p| Complex64::new((-a * a - b * b).exp() * ((4.0 * p).cos() + 0.1), 0.0))
            .unwrap();
        assert!(matches!(
            azimuthal_decompose(&f),
            Err(Error::NyquistViolation { .. })
        ));
    }

    #[test]
    fn separable_double_gauss_single_mode() {
        let g = build_grid(8.0, 48, 16).unwrap();
        let f = tpa_double_gauss(&g, 1.0, 1.0).unwrap();
        let dec = decompose(&f, 1e-10).unwrap();
        assert_eq!(dec.modes().len(), 1);
        assert!((dec.modes()[0].lambda - 1.0).abs() < 1e-12);
        assert_eq!((dec.modes()[0].m, dec.modes()[0].n), (0, 0));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g = build_grid(8.0, 32, 32).unwrap();
        let other = build_grid(9.0, 32, 32).unwrap();
        let f = tpa_double_gauss(&g, 2.0, 1.0).unwrap();
        let blocks = azimuthal_decompose(&f).unwrap();
        assert!(matches!(
            schmidt_decompose(&blocks, &other, 1e-6),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn tie_break_order() {
        let mut keys = vec![
            ordering_key(0.125, 0, -1),
            ordering_key(0.125, 0, 1),
            ordering_key(0.25, 0, 0),
            ordering_key(0.125 + 1e-16, 0, 2),
        ];
        keys.sort();
        assert_eq!(keys[0].1, 0);
        assert_eq!((keys[1].1, keys[1].2), (1, false));
        assert_eq!((keys[2].1, keys[2].2), (1, true));
        assert_eq!(keys[3].1, 2);
    }

    #[test]
    fn missing_mode_error() {
        let g = build_grid(8.0, 32, 16).unwrap();
        let dec = decompose(&tpa_double_gauss(&g, 1.0, 1.0).unwrap(), 1e-6).unwrap();
        assert_eq!(
            assemble_full_mode(&dec, 3, 2).unwrap_err(),
            Error::MissingMode { m: 3, n: 2 }
        );
    }
}
