//! Strictly alpha-stable draws and the seed-keyed coefficient field.

use dashmap::DashMap;
use num_bigint::{BigInt, Sign};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::wavelet::WaveletSpec;

/// Default bound on memoized coefficients before the memo is flushed.
pub const DEFAULT_MEMO_CAPACITY: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub scale: f64,
    /// Allows `alpha = 2` (Gaussian law with variance `2 scale^2`); test use only.
    #[serde(default)]
    pub gaussian: bool,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, scale: f64) -> Result<Self> {
        let p = Self { alpha, beta, scale, gaussian: false };
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian_test(scale: f64) -> Self {
        Self { alpha: 2.0, beta: 0.0, scale, gaussian: true }
    }

    pub fn validate(&self) -> Result<()> {
        let alpha_ok = (self.alpha > 1.0 && self.alpha < 2.0) || (self.gaussian && self.alpha == 2.0);
        if !alpha_ok {
            return Err(LabError::invalid(format!("alpha = {} must lie in (1, 2)", self.alpha)));
        }
        if !(self.beta.abs() <= 1.0) {
            return Err(LabError::invalid(format!("beta = {} must lie in [-1, 1]", self.beta)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(LabError::invalid(format!("scale = {} must be positive", self.scale)));
        }
        Ok(())
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

/// Chambers-Mallows-Stuck transform of two uniforms into a strictly stable
/// draw with zero shift.
pub fn cms_sample<T: Real>(params: &StableParams, u1: T, u2: T) -> Result<T> {
    params.validate()?;
    let open = |u: T| u > T::zero() && u < T::one();
    if !open(u1) {
        return Err(LabError::UniformOutOfRange(u1.f()));
    }
    if !open(u2) {
        return Err(LabError::UniformOutOfRange(u2.f()));
    }
    let a = T::c(params.alpha);
    let v = T::PI() * (u1 - T::c(0.5));
    let w = -u2.ln();
    let t = (T::PI() * a / T::c(2.0)).tan();
    let b = T::c(params.beta);
    let shift = (b * t).atan() / a;
    let s = (T::one() + b * b * t * t).powf(T::one() / (T::c(2.0) * a));
    let arg = a * (v + shift);
    let x = s * arg.sin() / v.cos().powf(T::one() / a) * ((v - arg).cos() / w).powf((T::one() - a) / a);
    Ok(x * T::c(params.scale))
}

/// Maps 64 random bits to the open unit interval.
#[inline]
pub fn open_uniform(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn key_for_level(seed: u64, j: i64) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&j.to_le_bytes());
    key[16..24].copy_from_slice(b"lmsm-eps");
    key
}

/// Generator for the uniform stream of coefficient `(j, k)`: the key carries
/// `(seed, j)` and the ChaCha stream id carries `k`, so every index owns an
/// independent stream and draws never depend on query order.
fn stream(seed: u64, j: i64, k: i64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::from_seed(key_for_level(seed, j));
    rng.set_stream(k as u64);
    rng
}

/// Stream for indices beyond `i64`; the key is a hash of the full index.
fn big_stream(seed: u64, j: i64, k: &BigInt) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"lmsm-eps-big");
    h.update(seed.to_le_bytes());
    h.update(j.to_le_bytes());
    let (sign, bytes) = k.to_bytes_le();
    h.update([matches!(sign, Sign::Minus) as u8]);
    h.update(&bytes);
    let key: [u8; 32] = h.finalize().into();
    ChaCha20Rng::from_seed(key)
}

#[derive(Debug)]
pub struct CoefficientField {
    pub params: StableParams,
    pub master_seed: u64,
    /// Scale of every coefficient: `||psi||_alpha * params.scale`.
    pub coef_scale: f64,
    multiplier: f64,
    memo: DashMap<(i64, i64), f64>,
    capacity: usize,
}

impl CoefficientField {
    /// Field whose coefficients have scale `coef_scale` directly.
    pub fn with_coef_scale(params: StableParams, master_seed: u64, coef_scale: f64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            master_seed,
            coef_scale,
            multiplier: 1.0,
            memo: DashMap::new(),
            capacity: DEFAULT_MEMO_CAPACITY,
        })
    }

    /// Field scaled by the `L^alpha` norm of the wavelet.
    pub fn new<T: Real>(params: StableParams, master_seed: u64, wavelet: &WaveletSpec<T>) -> Result<Self> {
        let norm = scale_of_coefficients(wavelet, params.alpha)?;
        Self::with_coef_scale(params, master_seed, norm * params.scale)
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity.max(1);
        self
    }

    /// Multiplies every coefficient by `c` (used for linearity checks).
    pub fn scaled(mut self, c: f64) -> Self {
        self.multiplier *= c;
        self.memo.clear();
        self
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn draw(&self, mut rng: ChaCha20Rng) -> f64 {
        let u1 = open_uniform(rng.next_u64());
        let u2 = open_uniform(rng.next_u64());
        let unit = self.params.with_scale(1.0);
        // Uniforms from `open_uniform` are strictly inside (0, 1).
        let x = cms_sample(&unit, u1, u2).expect("open uniforms");
        x * self.coef_scale * self.multiplier
    }

    fn compute(&self, j: i64, k: i64) -> f64 {
        self.draw(stream(self.master_seed, j, k))
    }

    /// `epsilon_{j,k}`, memoized.
    pub fn coefficient(&self, j: i64, k: i64) -> f64 {
        if let Some(v) = self.memo.get(&(j, k)) {
            return *v;
        }
        let v = self.compute(j, k);
        if self.memo.len() >= self.capacity {
            self.memo.clear();
        }
        self.memo.insert((j, k), v);
        v
    }

    /// `epsilon_{j,k}` without touching the memo (for one-off scans of huge
    /// index ranges).
    pub fn coefficient_uncached(&self, j: i64, k: i64) -> f64 {
        self.compute(j, k)
    }

    /// Coefficient at an arbitrary-precision translation index; agrees with
    /// [`Self::coefficient`] whenever `k` fits in `i64`.
    pub fn coefficient_big(&self, j: i64, k: &BigInt) -> f64 {
        match i64::try_from(k) {
            Ok(small) => self.coefficient(j, small),
            Err(_) => self.draw(big_stream(self.master_seed, j, k)),
        }
    }

    /// Dense block `epsilon_{j,k}` for `k` in `k_lo..=k_hi`, bypassing the memo.
    pub fn block(&self, j: i64, k_lo: i64, k_hi: i64) -> Vec<f64> {
        if k_hi < k_lo {
            return Vec::new();
        }
        let n = (k_hi - k_lo + 1) as usize;
        if n < 4096 {
            return (k_lo..=k_hi).map(|k| self.compute(j, k)).collect();
        }
        let mut out = vec![0.0; n];
        out.par_chunks_mut(2048).enumerate().for_each(|(c, chunk)| {
            let start = k_lo + (c * 2048) as i64;
            for (i, slot) in chunk.iter_mut().enumerate() {
                *slot = self.compute(j, start + i as i64);
            }
        });
        out
    }

    /// CSV dump with columns `j,k,epsilon`.
    pub fn to_csv(&self, j_range: (i64, i64), k_range: (i64, i64)) -> String {
        let mut out = String::from("j,k,epsilon\n");
        for j in j_range.0..=j_range.1 {
            for (i, v) in self.block(j, k_range.0, k_range.1).iter().enumerate() {
                out.push_str(&format!("{j},{},{v:.17e}\n", k_range.0 + i as i64));
            }
        }
        out
    }
}

/// `(∫ |psi|^alpha)^(1/alpha)`, the common scale of the coefficients.
pub fn scale_of_coefficients<T: Real>(wavelet: &WaveletSpec<T>, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(LabError::invalid(format!("alpha = {alpha} must lie in (1, 2]")));
    }
    wavelet.lalpha_norm(alpha)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailReport {
    pub x_grid: Vec<f64>,
    pub empirical_exceedance: Vec<f64>,
    pub hill_alpha_estimate: f64,
    /// Fraction of the sample used as upper order statistics by the Hill estimator.
    pub hill_fraction: f64,
    pub n_draws: usize,
}

/// Fraction of upper order statistics used by [`tail_report`].
pub const HILL_FRACTION: f64 = 1e-3;

/// Exceedance curve of `|epsilon_{0,k}|`, `k = 1..=n_draws`, and a Hill estimate
/// of the tail index.
pub fn tail_report(field: &CoefficientField, n_draws: usize, x_grid: &[f64]) -> Result<TailReport> {
    tail_report_with(field, n_draws, x_grid, HILL_FRACTION)
}

pub fn tail_report_with(
    field: &CoefficientField,
    n_draws: usize,
    x_grid: &[f64],
    hill_fraction: f64,
) -> Result<TailReport> {
    if n_draws < 10_000 {
        return Err(LabError::invalid("tail_report needs at least 10^4 draws"));
    }
    if x_grid.iter().any(|&x| !(x >= 1.0)) {
        return Err(LabError::invalid("tail grid points must be at least 1"));
    }
    let mut abs: Vec<f64> = field.block(0, 1, n_draws as i64).into_iter().map(f64::abs).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    let exceed = exceedance_curve(&abs, x_grid);
    let hill = hill_estimate(&abs, hill_fraction);
    Ok(TailReport {
        x_grid: x_grid.to_vec(),
        empirical_exceedance: exceed,
        hill_alpha_estimate: hill,
        hill_fraction,
        n_draws,
    })
}

/// `P(|X| > x)` for each `x`, given magnitudes sorted in decreasing order.
pub fn exceedance_curve(sorted_desc: &[f64], x_grid: &[f64]) -> Vec<f64> {
    let n = sorted_desc.len() as f64;
    x_grid.iter().map(|&x| sorted_desc.partition_point(|&v| v > x) as f64 / n).collect()
}

/// Hill estimator of the tail index from magnitudes sorted in decreasing order.
pub fn hill_estimate(sorted_desc: &[f64], fraction: f64) -> f64 {
    let k = ((sorted_desc.len() as f64 * fraction).ceil() as usize).clamp(1, sorted_desc.len() - 1);
    let threshold = sorted_desc[k].ln();
    let mean = sorted_desc[..k].iter().map(|v| v.ln() - threshold).sum::<f64>() / k as f64;
    1.0 / mean
}

/// Least-squares slope of `log P(|X|>x)` against `log x` over grid points
/// inside `[lo, hi]` with positive exceedance.
pub fn tail_slope(report: &TailReport, lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = report
        .x_grid
        .iter()
        .zip(&report.empirical_exceedance)
        .filter(|(&x, &p)| x >= lo && x <= hi && p > 0.0)
        .map(|(&x, &p)| (x.ln(), p.ln()))
        .collect();
    crate::analysis::linear_fit(&pts).map(|f| f.slope)
}

/// Sign balance `|mean(sign)|` over the first `n` coefficients at level 0.
pub fn sign_balance(field: &CoefficientField, n: usize) -> f64 {
    let s: f64 = field.block(0, 1, n as i64).iter().map(|v| v.signum()).sum();
    (s / n as f64).abs()
}
