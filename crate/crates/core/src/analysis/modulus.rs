//! Suprema of increment ratios against power-log moduli of continuity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::synthesis::HurstFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenominatorKind {
    /// `|t-s|^{H(t)∨H(s)-1/α} (1+|log|t-s||)^{2/α+η} + |H(t)-H(s)|`.
    GlobalThm,
    /// `|t-t0|^{H(t0)} (1+|log|t-t0||)^{1/α+η} + |H(t)-H(t0)|`.
    LocalThm,
    /// `|t-s|^{min H - 1/α} (1+|log|t-s||)^{-τ-η}`.
    LowerOptimality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub kind: DenominatorKind,
    pub ratio_sup: f64,
    /// Pair attaining the supremum (`(t0, t0)` when every ratio is zero).
    pub argmax: (f64, f64),
    pub eta: f64,
    pub tau: Option<f64>,
    /// Sample used as the base point of a local ratio.
    pub t0: Option<f64>,
    pub alpha: f64,
    pub interval: (f64, f64),
    pub pairs: u64,
}

fn check_samples(t: &[f64], y: &[f64], alpha: f64) -> Result<()> {
    if t.len() != y.len() {
        return Err(LabError::invalid(format!("{} abscissae but {} values", t.len(), y.len())));
    }
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(LabError::invalid(format!("alpha = {alpha} must lie in (1, 2)")));
    }
    Ok(())
}

/// `num / den` with `0/0 = 0`.
#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[inline]
fn log_factor(d: f64, power: f64) -> f64 {
    (1.0 + d.ln().abs()).powf(power)
}

/// Largest ratio over all pairs `i < j` of samples inside `interval`.
fn pair_sup<F>(t: &[f64], y: &[f64], interval: (f64, f64), den: F) -> (f64, (f64, f64), u64)
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let idx: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= interval.0 && t[i] <= interval.1).collect();
    let n = idx.len() as u64;
    let best = idx
        .par_iter()
        .enumerate()
        .map(|(a, &i)| {
            let mut best = (0.0f64, (t[i], t[i]));
            for &j in &idx[a + 1..] {
                let r = ratio((y[i] - y[j]).abs(), den(t[i], t[j]));
                if r > best.0 {
                    best = (r, (t[i], t[j]));
                }
            }
            best
        })
        .reduce(|| (0.0, (interval.0, interval.0)), |a, b| if b.0 > a.0 { b } else { a });
    (best.0, best.1, n * n.saturating_sub(1) / 2)
}

/// Supremum over sampled pairs in `interval` of `|Y(t)-Y(s)|` divided by the
/// global power-log modulus with varying exponent.
pub fn modulus_ratio_global(
    t: &[f64],
    y: &[f64],
    hurst: &HurstFunction,
    alpha: f64,
    interval: (f64, f64),
    eta: f64,
) -> Result<ModulusReport> {
    check_samples(t, y, alpha)?;
    if !(eta > 0.0) {
        return Err(LabError::invalid(format!("eta = {eta} must be positive")));
    }
    let power = 2.0 / alpha + eta;
    let (ratio_sup, argmax, pairs) = pair_sup(t, y, interval, |a, b| {
        let (ha, hb) = (hurst.eval(a), hurst.eval(b));
        let d = (a - b).abs();
        d.powf(ha.max(hb) - 1.0 / alpha) * log_factor(d, power) + (ha - hb).abs()
    });
    Ok(ModulusReport {
        kind: DenominatorKind::GlobalThm,
        ratio_sup,
        argmax,
        eta,
        tau: None,
        t0: None,
        alpha,
        interval,
        pairs,
    })
}

/// Same pairs against the lower modulus `|t-s|^{min H - 1/α}(1+|log|t-s||)^{-τ-η}`,
/// whose supremum is infinite on the continuum.
pub fn modulus_ratio_lower(
    t: &[f64],
    y: &[f64],
    hurst: &HurstFunction,
    alpha: f64,
    interval: (f64, f64),
    tau: f64,
    eta: f64,
) -> Result<ModulusReport> {
    check_samples(t, y, alpha)?;
    if !(eta > 0.0 && tau >= 0.0) {
        return Err(LabError::invalid(format!("need eta > 0 and tau >= 0 (got {eta}, {tau})")));
    }
    let h_min =
        t.iter().filter(|&&x| x >= interval.0 && x <= interval.1).map(|&x| hurst.eval(x)).fold(f64::INFINITY, f64::min);
    let (ratio_sup, argmax, pairs) = pair_sup(t, y, interval, |a, b| {
        let d = (a - b).abs();
        d.powf(h_min - 1.0 / alpha) * log_factor(d, -tau - eta)
    });
    Ok(ModulusReport {
        kind: DenominatorKind::LowerOptimality,
        ratio_sup,
        argmax,
        eta,
        tau: Some(tau),
        t0: None,
        alpha,
        interval,
        pairs,
    })
}

/// Supremum over samples `t` in `window` of `|Y(t)-Y(t0)|` divided by the
/// local power-log modulus at `t0`. The base point is the sample nearest `t0`.
pub fn modulus_ratio_local(
    t: &[f64],
    y: &[f64],
    hurst: &HurstFunction,
    alpha: f64,
    t0: f64,
    window: (f64, f64),
    eta: f64,
) -> Result<ModulusReport> {
    check_samples(t, y, alpha)?;
    if !(eta >= 0.0) {
        return Err(LabError::invalid(format!("eta = {eta} must be nonnegative")));
    }
    let inside: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= window.0 && t[i] <= window.1).collect();
    let base = inside
        .iter()
        .copied()
        .min_by(|&a, &b| (t[a] - t0).abs().total_cmp(&(t[b] - t0).abs()))
        .ok_or_else(|| LabError::invalid(format!("no samples in [{}, {}]", window.0, window.1)))?;
    let (tb, yb) = (t[base], y[base]);
    let h0 = hurst.eval(tb);
    let power = 1.0 / alpha + eta;
    let mut best = (0.0f64, (tb, tb));
    for &i in &inside {
        let d = (t[i] - tb).abs();
        let den = d.powf(h0) * log_factor(d, power) + (hurst.eval(t[i]) - h0).abs();
        let r = ratio((y[i] - yb).abs(), den);
        if r > best.0 {
            best = (r, (t[i], tb));
        }
    }
    Ok(ModulusReport {
        kind: DenominatorKind::LocalThm,
        ratio_sup: best.0,
        argmax: best.1,
        eta,
        tau: None,
        t0: Some(tb),
        alpha,
        interval: window,
        pairs: inside.len().saturating_sub(1) as u64,
    })
}
