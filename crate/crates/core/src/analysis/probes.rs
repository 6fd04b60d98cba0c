//! Coefficient-level probes behind the optimality of the moduli of continuity.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::stable::CoefficientField;

/// Coefficients drawn per level before the probe switches to a strided
/// subsample (whose maximum is then only a lower bound).
pub const DEFAULT_PROBE_BUDGET: u64 = 1 << 18;

/// `τ = (1 + 2/α) / (αρ - 1)`, zero when `ρ` is infinite.
pub fn tau_of(alpha: f64, rho: f64) -> Result<f64> {
    if !(alpha * rho > 1.0) {
        return Err(LabError::invalid(format!("alpha * rho = {} must exceed 1", alpha * rho)));
    }
    Ok(if rho.is_infinite() { 0.0 } else { (1.0 + 2.0 / alpha) / (alpha * rho - 1.0) })
}

/// Window exponents `(d, e)` splitting `((1+2/α+τ0)/ρ, ατ0)` into thirds.
pub fn window_exponents(alpha: f64, rho: f64, tau0: f64) -> Result<(f64, f64)> {
    let tau = tau_of(alpha, rho)?;
    let bound = (1.0 + 2.0 / alpha + tau0) / rho;
    if !(tau0 > tau) || !(alpha * tau0 > bound) {
        return Err(LabError::invalid(format!(
            "tau0 = {tau0} too small: need tau0 > {tau} and alpha*tau0 = {} > {bound}",
            alpha * tau0
        )));
    }
    Ok((2.0 / 3.0 * bound + alpha * tau0 / 3.0, bound / 3.0 + 2.0 / 3.0 * alpha * tau0))
}

/// `{k: k 2^-j in [m1, m2], j^-e <= |t0 - k 2^-j| <= j^-d}` as at most two
/// inclusive ranges, left one first.
pub fn index_window(j: i64, t0: f64, interval: (f64, f64), d: f64, e: f64) -> Vec<(i64, i64)> {
    let s = 2f64.powi(j as i32);
    let jf = j as f64;
    let (near, far) = (jf.powf(-e), jf.powf(-d));
    let (k_min, k_max) = ((interval.0 * s).ceil() as i64, (interval.1 * s).floor() as i64);
    let in_window = |k: i64| {
        let dist = (t0 - k as f64 / s).abs();
        dist >= near && dist <= far
    };
    // Candidate ends from the real bounds, then nudged until exact.
    let mut out = Vec::new();
    for (a, b) in [((t0 - far) * s, (t0 - near) * s), ((t0 + near) * s, (t0 + far) * s)] {
        let mut lo = (a.ceil() as i64).max(k_min);
        let mut hi = (b.floor() as i64).min(k_max);
        while lo <= hi && !in_window(lo) {
            lo += 1;
        }
        while hi >= lo && !in_window(hi) {
            hi -= 1;
        }
        if lo <= hi {
            out.push((lo, hi));
        }
    }
    if out.len() == 2 && out[1].0 <= out[0].1 {
        out = vec![(out[0].0, out[0].1.max(out[1].1))];
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeLevel {
    pub j: i64,
    pub ranges: Vec<(i64, i64)>,
    pub count: u64,
    pub evaluated: u64,
    pub max_abs: f64,
    /// `j^τ0 2^{-j/α} max |ε_{j,k}|` over the evaluated indices.
    pub s_j: f64,
    /// Set when only a subsample was drawn, so `s_j` is a lower bound.
    pub lower_bound: bool,
    /// `s_j` rescaled by `(count / evaluated)^{1/α}`, the typical growth of a
    /// stable maximum; equals `s_j` when every index was drawn.
    pub s_j_extrapolated: f64,
    /// Every index lies at least `2^{-j/(2α)}` inside the interval.
    pub inclusion_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityProbeReport {
    pub alpha: f64,
    pub rho: f64,
    pub tau: f64,
    pub tau0: f64,
    pub d: f64,
    pub e: f64,
    pub t0: f64,
    pub interval: (f64, f64),
    pub levels: Vec<ProbeLevel>,
    /// Minimum of `s_j` over the upper half of the level range.
    pub trailing_min: f64,
    pub trailing_from: i64,
    /// Some trailing level used a subsample.
    pub trailing_is_lower_bound: bool,
}

/// Scans `D_j(t0, τ0)` for `j` in `j_range` (inclusive) and records
/// `s_j = j^τ0 2^{-j/α} max_{D_j} |ε_{j,k}|`.
pub fn optimality_probe(
    field: &CoefficientField,
    t0: f64,
    interval: (f64, f64),
    tau0: f64,
    rho: f64,
    j_range: (i64, i64),
    budget: u64,
) -> Result<OptimalityProbeReport> {
    let alpha = field.params.alpha;
    let tau = tau_of(alpha, rho)?;
    let (d, e) = window_exponents(alpha, rho, tau0)?;
    if !(interval.0 <= t0 && t0 <= interval.1) {
        return Err(LabError::invalid(format!("t0 = {t0} outside [{}, {}]", interval.0, interval.1)));
    }
    if j_range.0 < 1 || j_range.1 < j_range.0 || j_range.1 > 62 {
        return Err(LabError::invalid(format!("level range {j_range:?} must satisfy 1 <= lo <= hi <= 62")));
    }
    let budget = budget.max(1);
    let mut levels = Vec::new();
    for j in j_range.0..=j_range.1 {
        let ranges = index_window(j, t0, interval, d, e);
        let count: u64 = ranges.iter().map(|r| (r.1 - r.0 + 1) as u64).sum();
        if count == 0 {
            return Err(LabError::EmptyIndexSet(j));
        }
        let stride = count.div_ceil(budget);
        let picks: Vec<i64> = ranges.iter().flat_map(|&(lo, hi)| (lo..=hi).step_by(stride as usize)).collect();
        let max_abs = picks.par_iter().map(|&k| field.coefficient_uncached(j, k).abs()).reduce(|| 0.0, f64::max);
        let evaluated = picks.len() as u64;
        let s_j = (j as f64).powf(tau0) * 2f64.powf(-(j as f64) / alpha) * max_abs;
        let margin = 2f64.powf(-(j as f64) / (2.0 * alpha));
        let s = 2f64.powi(j as i32);
        let inclusion_holds =
            ranges.iter().all(|&(lo, hi)| lo as f64 / s >= interval.0 + margin && hi as f64 / s <= interval.1 - margin);
        levels.push(ProbeLevel {
            j,
            ranges,
            count,
            evaluated,
            max_abs,
            s_j,
            lower_bound: evaluated < count,
            s_j_extrapolated: s_j * (count as f64 / evaluated as f64).powf(1.0 / alpha),
            inclusion_holds,
        });
    }
    let trailing_from = j_range.0 + (j_range.1 - j_range.0) / 2;
    let tail: Vec<&ProbeLevel> = levels.iter().filter(|l| l.j >= trailing_from).collect();
    Ok(OptimalityProbeReport {
        alpha,
        rho,
        tau,
        tau0,
        d,
        e,
        t0,
        interval,
        trailing_min: tail.iter().map(|l| l.s_j).fold(f64::INFINITY, f64::min),
        trailing_from,
        trailing_is_lower_bound: tail.iter().any(|l| l.lower_bound),
        levels,
    })
}

/// `m0 = floor(log2(3R + 2)) + 1`.
pub fn spacing_exponent(radius: f64) -> u32 {
    (3.0 * radius + 2.0).log2().floor() as u32 + 1
}

/// `floor(2^r t0 + R + 2)` computed exactly from the binary expansion of `t0`.
pub fn probe_translation(t0: f64, r: u32, radius: f64) -> BigInt {
    // t0 = mant 2^exp exactly.
    let (mant, exp) = if t0 == 0.0 {
        (BigInt::zero(), 0i64)
    } else {
        let bits = t0.abs().to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), raw_exp - 1075) };
        let m = BigInt::from(m);
        (if t0 < 0.0 { -m } else { m }, e)
    };
    let shift = r as i64 + exp;
    // 2^r t0 = q + phi with q integer, phi in [0, 1).
    let (q, phi) = if shift >= 0 {
        (mant << shift as usize, 0.0)
    } else {
        // |2^r t0| < 2^53 here, so the split product is exact.
        let half = (r / 2) as i32;
        let x = t0 * 2f64.powi(half) * 2f64.powi(r as i32 - half);
        let fl = x.floor();
        (BigInt::from(fl as i64), x - fl)
    };
    q + BigInt::from((phi + radius + 2.0).floor() as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalProbeLevel {
    pub j: u32,
    /// `r = j m0`.
    pub r: u64,
    /// `l = floor(2^r t0 + R + 2)`, decimal.
    pub l: String,
    pub epsilon: f64,
    /// `|ε| / (j^{1/α} (ln j)^{1/α})`; undefined at `j = 1`.
    pub statistic: Option<f64>,
    pub running_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalProbeReport {
    pub alpha: f64,
    pub t0: f64,
    pub radius: f64,
    pub m0: u32,
    pub levels: Vec<LocalProbeLevel>,
}

/// Coefficients `ε_{j m0, l_j}` sitting just right of `t0` at the sparse
/// levels `r = j m0`, normalised by the iterated-logarithm scale.
pub fn local_optimality_probe(field: &CoefficientField, t0: f64, radius: f64, j_max: u32) -> Result<LocalProbeReport> {
    if !(radius > 0.0 && radius.is_finite()) || !t0.is_finite() {
        return Err(LabError::invalid(format!("need a finite t0 and radius > 0 (got {t0}, {radius})")));
    }
    let alpha = field.params.alpha;
    let m0 = spacing_exponent(radius);
    let mut running = 0.0f64;
    let mut levels = Vec::with_capacity(j_max as usize);
    for j in 1..=j_max {
        let r = j as u64 * m0 as u64;
        let rl = u32::try_from(r).map_err(|_| LabError::invalid("probe level overflow"))?;
        let l = probe_translation(t0, rl, radius);
        let eps = field.coefficient_big(r as i64, &l);
        let statistic = (j > 1).then(|| {
            let jf = j as f64;
            eps.abs() / (jf * jf.ln()).powf(1.0 / alpha)
        });
        if let Some(s) = statistic {
            running = running.max(s);
        }
        levels.push(LocalProbeLevel { j, r, l: l.to_string(), epsilon: eps, statistic, running_max: running });
    }
    Ok(LocalProbeReport { alpha, t0, radius, m0, levels })
}

/// Exact check that the intervals `[l_j 2^{-r_j} - R 2^{-r_j}, l_j 2^{-r_j} + R 2^{-r_j}]`,
/// `j = 1..=j_max`, are pairwise disjoint (`R` rounded up to an integer).
pub fn spacing_check(t0: f64, radius: f64, j_max: u32) -> bool {
    let m0 = spacing_exponent(radius);
    let rr = BigInt::from(radius.ceil() as i64);
    let top = j_max * m0;
    // Centres and radii scaled by 2^top.
    let items: Vec<(BigInt, BigInt)> = (1..=j_max)
        .map(|j| {
            let r = j * m0;
            let sh = (top - r) as usize;
            (probe_translation(t0, r, radius) << sh, &rr << sh)
        })
        .collect();
    items.iter().enumerate().all(|(a, (ca, ra))| items[a + 1..].iter().all(|(cb, rb)| (ca - cb).abs() > ra + rb))
}
