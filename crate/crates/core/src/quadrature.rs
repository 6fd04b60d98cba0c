//! Gauss–Legendre rules and an adaptive bisection driver.

use crate::error::{LabError, Result};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule on `[-1, 1]`, nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let two = T::c(2.0);
        for i in 0..n.div_ceil(2) {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = T::c(guess);
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::unit_roundoff() * T::c(4.0) {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            let w = two / ((T::one() - x * x) * dp * dp);
            nodes[i] = x;
            nodes[n - 1 - i] = -x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Rule mapped to the unit interval `[0, 1]`.
    pub fn unit(n: usize) -> Self {
        let r = Self::new(n);
        let half = T::c(0.5);
        Self {
            nodes: r.nodes.iter().map(|&x| (x + T::one()) * half).collect(),
            weights: r.weights.iter().map(|&w| w * half).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Returns (integral, integral of |f|) over `[a, b]`.
    pub fn apply<F: FnMut(T) -> T>(&self, f: &mut F, a: T, b: T) -> (T, T) {
        let half = (b - a) * T::c(0.5);
        let mid = (a + b) * T::c(0.5);
        let mut s = T::zero();
        let mut sa = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let y = f(mid + half * x);
            s = s + w * y;
            sa = sa + w * y.abs();
        }
        (s * half, sa * half.abs())
    }
}

fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_int(k as i64);
        let p2 = ((T::c(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_int(n as i64);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub depth_cap: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, depth_cap: 20 }
    }
}

/// Adaptive bisection on `[a, b]`. Each panel is accepted once the two-half
/// estimate agrees with the whole-panel estimate to its share of the global
/// tolerance `max(rtol |I|, 100 eps ∫|f|)`.
pub fn integrate_adaptive<T: Real, F: FnMut(T) -> T>(
    rule: &GaussLegendre<T>,
    f: &mut F,
    a: T,
    b: T,
    opts: AdaptiveOptions,
) -> Result<T> {
    integrate_adaptive_floor(rule, f, a, b, opts, T::zero())
}

/// As [`integrate_adaptive`] with an absolute tolerance floor, for pieces of
/// a larger integral whose own magnitude may be negligible.
pub fn integrate_adaptive_floor<T: Real, F: FnMut(T) -> T>(
    rule: &GaussLegendre<T>,
    f: &mut F,
    a: T,
    b: T,
    opts: AdaptiveOptions,
    floor: T,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    const START: usize = 4;
    let width = b - a;
    let mut panels = Vec::with_capacity(START);
    let mut total = T::zero();
    let mut total_abs = T::zero();
    for i in 0..START {
        let lo = a + width * T::from_int(i as i64) / T::from_int(START as i64);
        let hi = a + width * T::from_int(i as i64 + 1) / T::from_int(START as i64);
        let (s, sa) = rule.apply(f, lo, hi);
        total = total + s;
        total_abs = total_abs + sa;
        panels.push((lo, hi, s, 0usize));
    }
    let tol = (T::c(opts.rtol) * total.abs()).max(T::c(100.0) * T::unit_roundoff() * total_abs).max(floor);
    let mut result = T::zero();
    let mut worst = 0.0f64;
    let mut failed = false;
    while let Some((lo, hi, coarse, depth)) = panels.pop() {
        let mid = (lo + hi) * T::c(0.5);
        let (l, _) = rule.apply(f, lo, mid);
        let (r, _) = rule.apply(f, mid, hi);
        let fine = l + r;
        let err = (fine - coarse).abs();
        let share = tol * ((hi - lo) / width).abs();
        if err <= share {
            result = result + fine;
        } else if depth + 1 >= opts.depth_cap {
            result = result + fine;
            worst = worst.max(err.f());
            failed = true;
        } else {
            panels.push((lo, mid, l, depth + 1));
            panels.push((mid, hi, r, depth + 1));
        }
    }
    if failed {
        return Err(LabError::TolNotMet { rtol: opts.rtol, err: worst, depth: opts.depth_cap });
    }
    Ok(result)
}
