//! Hurst functions `H(t)` with values in a compact subinterval of `(1/alpha, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HurstFunction {
    Constant {
        h: f64,
    },
    /// `h0 + slope (t - t0)` clamped to `[lo, hi]`.
    LinearClamped {
        t0: f64,
        h0: f64,
        slope: f64,
        lo: f64,
        hi: f64,
    },
    /// `h0 + (h1 - h0) S((t - t0) / (t1 - t0))` with `S(x) = 3x^2 - 2x^3`
    /// on `[0, 1]`, constant outside.
    Smoothstep {
        t0: f64,
        t1: f64,
        h0: f64,
        h1: f64,
    },
    /// Piecewise-linear through `(t[i], h[i])`, constant beyond the ends.
    Tabulated {
        t: Vec<f64>,
        h: Vec<f64>,
    },
}

impl HurstFunction {
    pub fn constant(h: f64) -> Self {
        Self::Constant { h }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::LinearClamped { .. } => "linear-clamped",
            Self::Smoothstep { .. } => "smoothstep",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant { h } => *h,
            Self::LinearClamped { t0, h0, slope, lo, hi } => (h0 + slope * (t - t0)).clamp(*lo, *hi),
            Self::Smoothstep { t0, t1, h0, h1 } => {
                let x = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                h0 + (h1 - h0) * x * x * (3.0 - 2.0 * x)
            }
            Self::Tabulated { t: ts, h } => {
                if t <= ts[0] {
                    return h[0];
                }
                let last = ts.len() - 1;
                if t >= ts[last] {
                    return h[last];
                }
                let i = ts.partition_point(|&x| x <= t) - 1;
                let f = (t - ts[i]) / (ts[i + 1] - ts[i]);
                h[i] + f * (h[i + 1] - h[i])
            }
        }
    }

    /// `[min H, max H]` over the real line.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Self::Constant { h } => (*h, *h),
            Self::LinearClamped { slope, lo, hi, .. } => {
                if *slope == 0.0 {
                    let h = self.eval(0.0);
                    (h, h)
                } else {
                    (*lo, *hi)
                }
            }
            Self::Smoothstep { h0, h1, .. } => (h0.min(*h1), h0.max(*h1)),
            Self::Tabulated { h, .. } => {
                h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
            }
        }
    }

    /// Hölder order of `H` used by the optimality probe: infinite for a
    /// constant, 1 for kinked piecewise-linear kinds, 2 for the smoothstep
    /// (its second derivative jumps where it meets the constant pieces).
    pub fn rho(&self) -> f64 {
        match self {
            Self::Constant { .. } => f64::INFINITY,
            Self::LinearClamped { slope, .. } if *slope == 0.0 => f64::INFINITY,
            Self::LinearClamped { .. } | Self::Tabulated { .. } => 1.0,
            Self::Smoothstep { h0, h1, .. } if h0 == h1 => f64::INFINITY,
            Self::Smoothstep { .. } => 2.0,
        }
    }

    /// Checks the parameters and that every value lies in `(1/alpha, 1)`.
    pub fn validate(&self, alpha: f64) -> Result<()> {
        match self {
            Self::LinearClamped { lo, hi, slope, .. } if !(lo <= hi) || !slope.is_finite() => {
                return Err(LabError::invalid("linear-clamped Hurst function needs lo <= hi"));
            }
            Self::Smoothstep { t0, t1, .. } if !(t1 > t0) => {
                return Err(LabError::invalid("smoothstep Hurst function needs t1 > t0"));
            }
            Self::Tabulated { t, h } if t.is_empty() || t.len() != h.len() || t.windows(2).any(|w| !(w[1] > w[0])) => {
                return Err(LabError::invalid("tabulated Hurst function needs strictly increasing knots"));
            }
            _ => {}
        }
        let (lo, hi) = self.range();
        let bound = 1.0 / alpha;
        for h in [lo, hi] {
            if !(h > bound && h < 1.0) {
                return Err(LabError::HurstRange { h, lo: bound, hi: 1.0 });
            }
        }
        Ok(())
    }
}
