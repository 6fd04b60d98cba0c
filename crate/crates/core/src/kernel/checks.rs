//! Numerical checks of the identities satisfied by the kernel and its dual.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::scalar::Real;
use crate::special::gamma;
use crate::wavelet::WaveletSpec;

use super::direct::DirectKernel;
use super::table::{kernel_slices, KernelRow, KernelTable};
use super::{check_alpha, check_v, integration_order};

/// `Gamma(g) e^{-i sgn(xi) g pi/2} psi_hat(xi) / |xi|^g` with `g = v + 1 - 1/alpha`.
pub fn fourier_target<T: Real>(w: &WaveletSpec<T>, alpha: f64, v: f64, xi: T) -> Complex<T> {
    let g = integration_order(v, alpha);
    let gt = T::c(g);
    let sign = if xi < T::zero() { -T::one() } else { T::one() };
    let phase = -sign * gt * T::FRAC_PI_2();
    let (s, c) = phase.rsin_cos();
    let mag = T::c(gamma(g)) / (gt * xi.abs().rln()).rexp();
    w.psi_hat(xi) * Complex::new(c * mag, s * mag)
}

#[derive(Clone, Debug, Serialize)]
pub struct FourierReport {
    pub alpha: f64,
    pub v: f64,
    pub xi: Vec<f64>,
    pub rel_errors: Vec<f64>,
    pub max_rel_error: f64,
    /// Sample spacing is `2^-level`.
    pub level: u32,
    pub x_max: i64,
    pub scalar: String,
}

/// Samples `Psi(., v)` at spacing `2^-level` on `[1-N, x_max]`, takes the
/// discrete Fourier transform and compares it with [`fourier_target`].
///
/// The kernel behind the samples is the exact transform of the cubic
/// interpolant of psi; its spectrum differs from psi_hat by a factor
/// `1 - O((h xi)^4)`, which bounds the attainable agreement. Run it in
/// double-double when psi_hat is small on the grid.
pub fn fourier_check<T: Real>(
    w: &WaveletSpec<T>,
    alpha: f64,
    v: f64,
    xi_grid: &[f64],
    level: u32,
    x_max: i64,
) -> Result<FourierReport> {
    check_alpha(alpha)?;
    check_v(v, alpha)?;
    if xi_grid.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(crate::LabError::invalid("frequency grid must be finite and avoid 0"));
    }
    let x_first = (1 - w.order as i64) << level;
    let count = ((x_max << level) - x_first + 1) as usize;
    let samples = kernel_slices(w, alpha, T::c(v), 0, 0, level, x_first, 1, count)?.swap_remove(0);
    let h = T::c(0.5f64.powi(level as i32));
    let rel_errors: Vec<f64> = xi_grid
        .par_iter()
        .map(|&xi| {
            let xt = T::c(xi);
            let mut re = T::zero();
            let mut im = T::zero();
            for (i, &s) in samples.iter().enumerate() {
                let x = T::from_int(x_first + i as i64) * h;
                let (sn, cs) = (xt * x).rsin_cos();
                re = re + s * cs;
                im = im - s * sn;
            }
            let got = Complex::new(re * h, im * h);
            let want = fourier_target(w, alpha, v, xt);
            ((got - want).norm() / want.norm()).f()
        })
        .collect();
    let max_rel_error = rel_errors.iter().cloned().fold(0.0, f64::max);
    Ok(FourierReport {
        alpha,
        v,
        xi: xi_grid.to_vec(),
        rel_errors,
        max_rel_error,
        level,
        x_max,
        scalar: T::LABEL.to_string(),
    })
}

/// `n` log-spaced frequencies on `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport {
    pub v: f64,
    pub p: usize,
    pub q: usize,
    /// `sup (3 + |x|)^2 |∂_x^p ∂_v^q Psi(x, v)|` over the grid.
    pub sup_value: f64,
    pub argmax_x: f64,
    pub grid_points: usize,
}

/// Weighted supremum over an explicit grid, by direct quadrature.
pub fn localization_profile(
    kernel: &DirectKernel<'_, f64>,
    v: f64,
    p: usize,
    q: usize,
    x_grid: &[f64],
) -> Result<LocalizationReport> {
    let vals: Vec<f64> = x_grid
        .par_iter()
        .map(|&x| kernel.kernel_psi(x, v, p, q).map(|k| (3.0 + x.abs()).powi(2) * k.abs()))
        .collect::<Result<_>>()?;
    let (mut sup, mut arg) = (0.0, f64::NAN);
    for (&x, &s) in x_grid.iter().zip(&vals) {
        if s > sup {
            sup = s;
            arg = x;
        }
    }
    Ok(LocalizationReport { v, p, q, sup_value: sup, argmax_x: arg, grid_points: x_grid.len() })
}

/// `∫ Psi_dual(x, v) dx` by the trapezoid rule on the table samples.
pub fn dual_moment(table: &KernelTable, v: f64) -> Result<f64> {
    let row = table.dual_row(v)?;
    Ok(row.values().iter().sum::<f64>() * row.step())
}

/// Slices reused across many inner products at one `v`.
struct Rows {
    psi: KernelRow,
    dual: KernelRow,
    psi_lo: f64,
    psi_hi: f64,
    dual_lo: f64,
    dual_hi: f64,
}

impl Rows {
    fn new(table: &KernelTable, v: f64) -> Result<Self> {
        let n = table.wavelet_order as f64;
        let psi = table.row(v, 0, 0)?;
        let dual = table.dual_row(v)?;
        // Effective supports: exact zero on one side, table edge on the other.
        Ok(Self { psi_lo: 1.0 - n, psi_hi: psi.x_max, dual_lo: -dual.x_max, dual_hi: n, psi, dual })
    }

    fn inner(&self, j: i32, k: i64, j2: i32, k2: i64) -> f64 {
        let (s1, s2) = (2f64.powi(j), 2f64.powi(j2));
        // t-range where both factors are effectively nonzero.
        let lo = ((self.psi_lo + k as f64) / s1).max((self.dual_lo + k2 as f64) / s2);
        let hi = ((self.psi_hi + k as f64) / s1).min((self.dual_hi + k2 as f64) / s2);
        if hi <= lo {
            return 0.0;
        }
        let h = 0.5f64.powi(10 + j.max(j2).max(0));
        let i0 = (lo / h).floor() as i64;
        let i1 = (hi / h).ceil() as i64;
        let mut s = 0.0;
        let mut comp = 0.0;
        for i in i0..=i1 {
            let t = i as f64 * h;
            let term = self.psi.eval(s1 * t - k as f64) * self.dual.eval(s2 * t - k2 as f64);
            // Neumaier summation.
            let tot = s + term;
            comp += if s.abs() >= term.abs() { (s - tot) + term } else { (term - tot) + s };
            s = tot;
        }
        (s + comp) * h * (s1 * s2).sqrt()
    }
}

/// `2^{(j+j2)/2} ∫ Psi(2^j t - k, v) Psi_dual(2^j2 t - k2, v) dt`.
pub fn biorthogonality_check(table: &KernelTable, j: i32, k: i64, j2: i32, k2: i64, v: f64) -> Result<f64> {
    if j.abs() > 6 || j2.abs() > 6 {
        return Err(crate::LabError::invalid("levels beyond |j| = 6 are not supported"));
    }
    Ok(Rows::new(table, v)?.inner(j, k, j2, k2))
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub v: f64,
    pub indices: Vec<(i32, i64)>,
    pub matrix: Vec<Vec<f64>>,
    /// Largest `|G - I|` entry.
    pub max_abs_error: f64,
    pub worst_entry: ((i32, i64), (i32, i64)),
}

/// Gram matrix between kernel and dual translates over `j_range x k_range`.
pub fn gram_matrix(table: &KernelTable, v: f64, j_range: (i32, i32), k_range: (i64, i64)) -> Result<GramReport> {
    if j_range.0.abs() > 6 || j_range.1.abs() > 6 {
        return Err(crate::LabError::invalid("levels beyond |j| = 6 are not supported"));
    }
    let rows = Rows::new(table, v)?;
    let indices: Vec<(i32, i64)> =
        (j_range.0..=j_range.1).flat_map(|j| (k_range.0..=k_range.1).map(move |k| (j, k))).collect();
    let matrix: Vec<Vec<f64>> =
        indices.par_iter().map(|&(j, k)| indices.iter().map(|&(j2, k2)| rows.inner(j, k, j2, k2)).collect()).collect();
    let mut max_abs_error = 0.0;
    let mut worst_entry = (indices[0], indices[0]);
    for (a, row) in matrix.iter().enumerate() {
        for (b, &g) in row.iter().enumerate() {
            let err = (g - if a == b { 1.0 } else { 0.0 }).abs();
            if err > max_abs_error {
                max_abs_error = err;
                worst_entry = (indices[a], indices[b]);
            }
        }
    }
    Ok(GramReport { v, indices, matrix, max_abs_error, worst_entry })
}
