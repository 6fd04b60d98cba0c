//! Compactly supported Daubechies wavelets: filters, dyadic tables,
//! pointwise evaluation and the Fourier transform.

mod cascade;
mod filter;
mod fourier;

use num_complex::Complex;
use serde::Serialize;

pub use cascade::{cubic_weights, DyadicTable};
pub use filter::{daubechies_filter, highpass, orthonormality_defect, MAX_ORDER, MIN_ORDER};

use crate::error::{LabError, Result};
use crate::scalar::Real;

pub const DEFAULT_ORDER: usize = 20;
pub const DEFAULT_LEVEL: u32 = 12;
pub const MAX_DERIVATIVE: usize = 3;

#[derive(Clone, Debug)]
pub struct WaveletSpec<T> {
    /// Number of vanishing moments.
    pub order: usize,
    pub filter: Vec<T>,
    pub highpass: Vec<T>,
    /// Index of `highpass[0]`.
    pub highpass_first: i64,
    /// `2N - 1`, the support width; the support `[1 - N, N]` sits inside `[-R, R]`.
    pub support_radius: f64,
    pub max_derivative: usize,
    pub table: DyadicTable<T>,
    /// Multiplies every evaluation; 1 except in homogeneity checks.
    pub amplitude: T,
}

/// Builds the order-`order` wavelet with the default dyadic level.
pub fn build_wavelet<T: Real>(order: usize) -> Result<WaveletSpec<T>> {
    build_wavelet_at_level(order, DEFAULT_LEVEL)
}

pub fn build_wavelet_at_level<T: Real>(order: usize, level: u32) -> Result<WaveletSpec<T>> {
    if order < MIN_ORDER {
        return Err(LabError::invalid(format!(
            "wavelet order {order} is below the minimum of {MIN_ORDER} vanishing moments"
        )));
    }
    WaveletSpec::unchecked(order, level)
}

impl<T: Real> WaveletSpec<T> {
    /// Builds any order without the lower bound, for tests on small filters.
    pub fn unchecked(order: usize, level: u32) -> Result<Self> {
        let filter = daubechies_filter::<T>(order)?;
        let (highpass_first, highpass) = highpass(&filter);
        let max_p = MAX_DERIVATIVE.min(order.saturating_sub(1));
        let table = cascade::cascade(&filter, &highpass, highpass_first, level, max_p)?;
        Ok(Self {
            order,
            filter,
            highpass,
            highpass_first,
            support_radius: (2 * order - 1) as f64,
            max_derivative: max_p,
            table,
            amplitude: T::one(),
        })
    }

    /// Left and right end of the true support of psi.
    pub fn support(&self) -> (f64, f64) {
        (1.0 - self.order as f64, self.order as f64)
    }

    pub fn with_amplitude(mut self, c: T) -> Self {
        self.amplitude = c;
        self
    }

    /// `psi^(p)(x)`, exactly zero outside the support.
    pub fn psi_eval(&self, x: T, p: usize) -> T {
        assert!(p <= self.max_derivative, "derivative order {p} not tabulated");
        let (lo, hi) = self.support();
        if x.f() <= lo || x.f() >= hi {
            return T::zero();
        }
        self.amplitude * self.table.interpolate(p, x)
    }

    /// Dyadic samples of `psi^(p)` at spacing `2^-level` covering the support,
    /// returned with the index of the first sample.
    pub fn psi_samples(&self, p: usize, level: u32) -> (i64, Vec<T>) {
        assert!(level <= self.table.level, "requested level exceeds the dyadic table");
        let stride = 1usize << (self.table.level - level);
        let first = self.table.psi_first / stride as i64;
        let vals = self.table.psi[p].iter().step_by(stride).map(|&v| self.amplitude * v).collect();
        (first, vals)
    }

    pub fn psi_hat(&self, xi: T) -> Complex<T> {
        fourier::psi_hat(&self.filter, &self.highpass, self.highpass_first, xi) * self.amplitude
    }

    /// `∫ t^m psi(t) dt` by the dyadic trapezoid rule (exact for m < N up to
    /// roundoff because the sampled moments of psi vanish).
    pub fn moment(&self, m: u32) -> T {
        let h = T::c(self.table.step());
        let mut s = T::zero();
        for (j, &v) in self.table.psi[0].iter().enumerate() {
            let t = T::from_int(self.table.psi_first + j as i64) * h;
            s = s + t.powi(m as i32) * v;
        }
        s * h * self.amplitude
    }

    /// `(∫ |psi|^alpha)^(1/alpha)` by the trapezoid rule on the dyadic table,
    /// checked against the next coarser level.
    pub fn lalpha_norm(&self, alpha: f64) -> Result<f64> {
        let est = |stride: usize| -> f64 {
            let h = self.table.step() * stride as f64;
            let a = self.amplitude.abs().f();
            self.table.psi[0].iter().step_by(stride).map(|v| (a * v.f().abs()).powf(alpha)).sum::<f64>() * h
        };
        let fine = est(1);
        let coarse = est(2);
        let rel = ((fine - coarse) / fine).abs();
        if !(rel < 1e-7) {
            return Err(LabError::TolNotMet { rtol: 1e-7, err: rel, depth: self.table.level as usize });
        }
        Ok(fine.powf(1.0 / alpha))
    }

    /// Filter coefficients as CSV (`k,h,g` rows).
    pub fn filter_csv(&self) -> String {
        let mut out = String::from("k,lowpass,highpass_index,highpass\n");
        for (k, h) in self.filter.iter().enumerate() {
            let gk = self.highpass_first + k as i64;
            out.push_str(&format!("{k},{:.17e},{gk},{:.17e}\n", h.f(), self.highpass[k].f()));
        }
        out
    }

    /// Dyadic table as CSV (`x,psi,psi',psi'',psi'''`).
    pub fn table_csv(&self) -> String {
        let mut out = String::from("x");
        for p in 0..=self.max_derivative {
            out.push_str(&format!(",psi_d{p}"));
        }
        out.push('\n');
        let h = self.table.step();
        for j in 0..self.table.psi[0].len() {
            out.push_str(&format!("{:.17e}", (self.table.psi_first + j as i64) as f64 * h));
            for p in 0..=self.max_derivative {
                out.push_str(&format!(",{:.17e}", self.table.psi[p][j].f()));
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> WaveletSummary {
        WaveletSummary {
            order: self.order,
            support_radius: self.support_radius,
            level: self.table.level,
            max_derivative: self.max_derivative,
            scalar: T::LABEL.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WaveletSummary {
    pub order: usize,
    pub support_radius: f64,
    pub level: u32,
    pub max_derivative: usize,
    pub scalar: String,
}

#[cfg(test)]
mod tests;
