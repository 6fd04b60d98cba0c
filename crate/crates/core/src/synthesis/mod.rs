//! Truncated wavelet series for the stable field `X(u, v)`, its
//! v-derivatives, and multifractional paths `Y(t) = X(t, H(t))`.

mod export;
mod hurst;
mod series;

pub use export::{FieldSample, PathSample, SynthesisMeta};
pub use hurst::HurstFunction;
pub use series::{
    convergence_profile, lmsm_path, synthesize_field, synthesize_points, w_coefficient, SummationOrder, Synthesizer,
    DEFAULT_SHELL_THRESHOLD,
};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest admissible truncation level.
pub const MAX_LEVEL: u32 = 52;

/// Index set `{(j, k): |j| <= n, |k| <= M 2^(n+1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationSpec {
    pub m: f64,
    pub n: u32,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self { m: 2.0, n: 12 }
    }
}

impl TruncationSpec {
    pub fn new(m: f64, n: u32) -> Result<Self> {
        let s = Self { m, n };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(LabError::invalid(format!("truncation radius M = {} must be positive", self.m)));
        }
        // Beyond this, 2^n u - k stops being exact in f64 for dyadic u near 1.
        if self.n > MAX_LEVEL {
            return Err(LabError::invalid(format!("truncation level n = {} exceeds {MAX_LEVEL}", self.n)));
        }
        Ok(())
    }

    /// Largest admissible `|k|`.
    pub fn k_max(&self) -> i64 {
        (self.m * 2f64.powi(self.n as i32 + 1)).floor() as i64
    }

    /// `(2n + 1)(2 floor(M 2^(n+1)) + 1)`.
    pub fn cardinality(&self) -> u64 {
        (2 * self.n as u64 + 1) * (2 * self.k_max() as u64 + 1)
    }

    pub fn contains(&self, j: i64, k: i64) -> bool {
        j.unsigned_abs() <= self.n as u64 && k.abs() <= self.k_max()
    }
}

#[cfg(test)]
mod tests;
