//! Wavelet coefficients recovered from a sampled constant-Hurst path through
//! the dual kernel: `g_{j,k} = 2^{j(1+H)} ∫ Y(t) Ψ̃(2^j t - k, H) dt`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::kernel::{KernelRow, KernelTable};

/// Tail bound, relative to `|g|`, above which a coefficient is flagged.
pub const TAIL_WARNING_FRACTION: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredCoefficient {
    pub j: i64,
    pub k: i64,
    pub g: f64,
    /// `2^{j(1+H)} max|Y| ∫ |Ψ̃(2^j t - k)| dt` over the part of the dual
    /// kernel's support the samples miss.
    pub tail_bound: f64,
    /// `tail_bound > TAIL_WARNING_FRACTION |g|`.
    pub truncated: bool,
}

/// `∫ |row(x)| dx` over `x` outside `[lo, hi]`, with the `x^-2` decay
/// continued beyond the tabulated range.
fn uncovered_mass(row: &KernelRow, lo: f64, hi: f64) -> f64 {
    let h = row.step();
    let vals = row.values();
    // Reflected storage: sample i sits at x = -(x_min + i h).
    let x_of = |i: usize| -(row.x_min + i as f64 * h);
    let inside: f64 = vals
        .iter()
        .enumerate()
        .filter(|&(i, _)| {
            let x = x_of(i);
            x < lo || x > hi
        })
        .map(|(_, v)| v.abs() * h)
        .sum();
    let far = -row.x_max;
    let edge = vals.last().map_or(0.0, |v| v.abs());
    let beyond = if lo <= far { edge * row.x_max * row.x_max / lo.abs() } else { edge * row.x_max };
    inside + beyond
}

/// Recovers `g_{j,k}` for each `(j, k)` in `pairs` from samples `(t, y)` of a
/// path with constant Hurst index `h_star` (trapezoid rule on the samples).
pub fn recover_coefficients(
    table: &KernelTable,
    t: &[f64],
    y: &[f64],
    h_star: f64,
    pairs: &[(i64, i64)],
) -> Result<Vec<RecoveredCoefficient>> {
    if t.len() != y.len() || t.len() < 2 {
        return Err(LabError::invalid("recovery needs at least two samples with matching lengths"));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LabError::invalid("sample abscissae must increase"));
    }
    let row = table.dual_row(h_star)?;
    let y_max = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (t_lo, t_hi) = (t[0], t[t.len() - 1]);
    Ok(pairs
        .iter()
        .map(|&(j, k)| {
            let s = 2f64.powi(j as i32);
            let f: Vec<f64> = t.iter().zip(y).map(|(&ti, &yi)| yi * row.eval(s * ti - k as f64)).collect();
            let integral: f64 =
                t.windows(2).zip(f.windows(2)).map(|(tw, fw)| 0.5 * (tw[1] - tw[0]) * (fw[0] + fw[1])).sum();
            let norm = 2f64.powf(j as f64 * (1.0 + h_star));
            let g = norm * integral;
            let mass = uncovered_mass(&row, s * t_lo - k as f64, s * t_hi - k as f64);
            let tail_bound = norm * y_max * mass / s;
            RecoveredCoefficient { j, k, g, tail_bound, truncated: tail_bound > TAIL_WARNING_FRACTION * g.abs() }
        })
        .collect())
}
