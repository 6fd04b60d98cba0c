//! Scalar abstraction shared by every numerical routine.
//!
//! `Real` extends `num_traits::Float` with elementary functions that are
//! accurate to the full precision of the format. For `f32`/`f64` these are
//! the platform functions; [`DoubleDouble`] carries its own.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumCast};
use rustfft::FftPlanner;

mod dd;
pub use dd::DoubleDouble;

pub trait Real: Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Send + Sync + 'static {
    /// Short label used in reports and table headers.
    const LABEL: &'static str;

    /// Relative spacing of the format (`Float::epsilon` is not meaningful
    /// for every implementor).
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }

    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn f(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer is representable")
    }

    fn rexp(self) -> Self {
        self.exp()
    }

    fn rln(self) -> Self {
        self.ln()
    }

    fn rpowf(self, y: Self) -> Self {
        self.powf(y)
    }

    fn rsin_cos(self) -> (Self, Self) {
        self.sin_cos()
    }

    /// `exp(-i x)` as a complex number.
    fn cis_neg(self) -> Complex<Self> {
        let (s, c) = self.rsin_cos();
        Complex::new(c, -s)
    }

    /// Full linear convolution, `out[n] = sum_m a[m] b[n-m]`.
    fn convolve(a: &[Self], b: &[Self]) -> Vec<Self> {
        direct_convolution(a, b)
    }
}

pub fn direct_convolution<T: Float>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == T::zero() {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o = *o + x * y;
        }
    }
    out
}

impl Real for f32 {
    const LABEL: &'static str = "f32";
}

impl Real for f64 {
    const LABEL: &'static str = "f64";

    fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
        if a.len().min(b.len()) < 64 {
            return direct_convolution(a, b);
        }
        fft_convolution(a, b)
    }
}

fn fft_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n_out = a.len() + b.len() - 1;
    let n = n_out.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fa.resize(n, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fb.resize(n, Complex::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / n as f64;
    fa[..n_out].iter().map(|z| z.re * scale).collect()
}

impl Real for DoubleDouble {
    const LABEL: &'static str = "double-double";

    fn unit_roundoff() -> Self {
        DoubleDouble::new(2f64.powi(-104))
    }

    fn f(self) -> f64 {
        self.hi() + self.lo()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_convolution_matches_direct() {
        let a: Vec<f64> = (0..300).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let b: Vec<f64> = (0..257).map(|i| (i as f64 * 0.1).sin()).collect();
        let f = f64::convolve(&a, &b);
        let d = direct_convolution(&a, &b);
        assert_eq!(f.len(), d.len());
        for (x, y) in f.iter().zip(&d) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn generic_helpers_round_trip() {
        assert_eq!(f64::c(0.25).f(), 0.25);
        assert_eq!(DoubleDouble::c(0.25).f(), 0.25);
        assert_eq!(DoubleDouble::from_int(7).f(), 7.0);
        assert!(DoubleDouble::unit_roundoff().f() < 1e-30);
    }
}
