//! Hölder exponents from the maximal oscillation `sup_{|t-s|<=h} |f(t)-f(s)|`.

use serde::{Deserialize, Serialize};

use super::regression::linear_fit;
use crate::error::{LabError, Result};

/// Fewest samples accepted inside the analysed interval.
pub const MIN_SAMPLES: usize = 1 << 10;
/// Fewest octaves the regression needs.
pub const MIN_OCTAVES: usize = 4;
/// Slopes are clamped into `[0, EXPONENT_CEILING]`.
pub const EXPONENT_CEILING: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolderMode {
    UniformInterval,
    LocalPoint,
}

/// Estimates along the shrinking neighbourhoods used by [`local_holder`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stabilization {
    /// `(i, exponent)` for each half-width `2^-i` that produced an estimate.
    pub levels: Vec<(u32, f64)>,
    /// Difference between the two innermost estimates.
    pub last_change: f64,
    /// `last_change` within [`STABILITY_TOLERANCE`].
    pub stable: bool,
}

/// Largest change between the two innermost estimates still called stable.
pub const STABILITY_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub exponent: f64,
    /// Slope before clamping.
    pub raw_slope: f64,
    /// Set when the slope fell outside `[0, EXPONENT_CEILING]`.
    pub clamped: bool,
    pub intercept: f64,
    pub regression_r2: f64,
    pub scale_range: (f64, f64),
    pub mode: HolderMode,
    pub interval: (f64, f64),
    /// `(h, oscillation)` pairs that entered the regression.
    pub octaves: Vec<(f64, f64)>,
    pub stabilization: Option<Stabilization>,
}

/// Samples of `(t, y)` with `t` in `[lo, hi]`, checked for a uniform grid.
fn window<'a>(t: &'a [f64], y: &'a [f64], lo: f64, hi: f64) -> Result<(&'a [f64], f64)> {
    if t.len() != y.len() {
        return Err(LabError::invalid(format!("{} abscissae but {} values", t.len(), y.len())));
    }
    if !(lo < hi) {
        return Err(LabError::invalid(format!("empty interval [{lo}, {hi}]")));
    }
    let a = t.partition_point(|&x| x < lo);
    let b = t.partition_point(|&x| x <= hi);
    let n = b.saturating_sub(a);
    if n < MIN_SAMPLES {
        return Err(LabError::invalid(format!("{n} samples in [{lo}, {hi}], at least {MIN_SAMPLES} needed")));
    }
    let ts = &t[a..b];
    let dt = (ts[n - 1] - ts[0]) / (n - 1) as f64;
    if !(dt > 0.0) || ts.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(LabError::invalid("oscillation estimates need a uniform, increasing grid"));
    }
    Ok((&y[a..b], dt))
}

/// Maximal oscillation over every window of `lag + 1` consecutive samples,
/// for `lag = 1, 2, 4, ...` up to `max_lag`.
pub fn dyadic_oscillations(y: &[f64], max_lag: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    if y.len() < 2 {
        return out;
    }
    let mut hi: Vec<f64> = y.windows(2).map(|w| w[0].max(w[1])).collect();
    let mut lo: Vec<f64> = y.windows(2).map(|w| w[0].min(w[1])).collect();
    let mut lag = 1;
    loop {
        let osc = hi.iter().zip(&lo).fold(0.0f64, |m, (a, b)| m.max(a - b));
        out.push((lag, osc));
        if 2 * lag > max_lag || hi.len() <= lag {
            break;
        }
        // Windows [s, s + 2 lag] from the two halves [s, s + lag], [s + lag, s + 2 lag].
        let n = hi.len() - lag;
        hi = (0..n).map(|s| hi[s].max(hi[s + lag])).collect();
        lo = (0..n).map(|s| lo[s].min(lo[s + lag])).collect();
        lag *= 2;
    }
    out
}

/// Slope of `log2 osc(h)` against `log2 h` for `h = 2^i dt` between `4 dt`
/// and `(hi - lo) / 8`.
pub fn uniform_holder(t: &[f64], y: &[f64], interval: (f64, f64)) -> Result<HolderEstimate> {
    let (lo, hi) = interval;
    let (ys, dt) = window(t, y, lo, hi)?;
    let h_max = (hi - lo) / 8.0 * (1.0 + 1e-9);
    let max_lag = (h_max / dt).floor() as usize;
    let octaves: Vec<(f64, f64)> = dyadic_oscillations(ys, max_lag)
        .into_iter()
        .filter(|&(lag, osc)| lag >= 4 && lag as f64 * dt <= h_max && osc > 0.0)
        .map(|(lag, osc)| (lag as f64 * dt, osc))
        .collect();
    if octaves.len() < MIN_OCTAVES {
        return Err(LabError::InsufficientScales { needed: MIN_OCTAVES, got: octaves.len() });
    }
    // Logs of osc / max osc, so rescaling by a power of two leaves the slope bit-identical.
    let top = octaves.iter().fold(0.0f64, |m, o| m.max(o.1));
    let pts: Vec<(f64, f64)> = octaves.iter().map(|&(h, o)| (h.log2(), (o / top).log2())).collect();
    let mut fit = linear_fit(&pts).ok_or(LabError::InsufficientScales { needed: MIN_OCTAVES, got: 0 })?;
    fit.intercept += top.log2();
    let exponent = fit.slope.clamp(0.0, EXPONENT_CEILING);
    Ok(HolderEstimate {
        exponent,
        raw_slope: fit.slope,
        clamped: exponent != fit.slope,
        intercept: fit.intercept,
        regression_r2: fit.r2,
        scale_range: (octaves[0].0, octaves[octaves.len() - 1].0),
        mode: HolderMode::UniformInterval,
        interval,
        octaves,
        stabilization: None,
    })
}

/// Uniform estimates on `[t0 - 2^-i, t0 + 2^-i]`, `i = 1..=shrink_levels`;
/// returns the innermost one that could be formed.
pub fn local_holder(t: &[f64], y: &[f64], t0: f64, shrink_levels: u32) -> Result<HolderEstimate> {
    let (first, last) = match (t.first(), t.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(LabError::invalid("no samples")),
    };
    if !(t0 > first && t0 < last) {
        return Err(LabError::invalid(format!("t0 = {t0} is not interior to [{first}, {last}]")));
    }
    let mut levels = Vec::new();
    let mut best: Option<HolderEstimate> = None;
    let mut last_err = None;
    for i in 1..=shrink_levels {
        let half = 2f64.powi(-(i as i32));
        if t0 - half < first || t0 + half > last {
            continue;
        }
        match uniform_holder(t, y, (t0 - half, t0 + half)) {
            Ok(e) => {
                levels.push((i, e.exponent));
                best = Some(e);
            }
            Err(e) => {
                last_err = Some(e);
                break;
            }
        }
    }
    let mut est = match best {
        Some(e) => e,
        None => {
            return Err(last_err.unwrap_or_else(|| {
                LabError::invalid(format!("no neighbourhood of t0 = {t0} fits inside the samples"))
            }))
        }
    };
    let last_change = match levels.len() {
        0 | 1 => f64::NAN,
        n => (levels[n - 1].1 - levels[n - 2].1).abs(),
    };
    est.mode = HolderMode::LocalPoint;
    est.stabilization = Some(Stabilization { levels, last_change, stable: last_change <= STABILITY_TOLERANCE });
    Ok(est)
}
