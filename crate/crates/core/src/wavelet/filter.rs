//! Daubechies low-pass filter by spectral factorization.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::scalar::{DoubleDouble, Real};
use crate::special::binomial;

pub const MIN_ORDER: usize = 15;
pub const MAX_ORDER: usize = 40;

fn acceptance<T: Real>() -> f64 {
    1e-2 * T::unit_roundoff().f().sqrt()
}

/// Principal square root that only relies on the scalar `sqrt`.
pub(crate) fn csqrt<T: Real>(w: Complex<T>) -> Complex<T> {
    let r = (w.re * w.re + w.im * w.im).sqrt();
    let half = T::c(0.5);
    let re = ((r + w.re) * half).max(T::zero()).sqrt();
    let im = ((r - w.re) * half).max(T::zero()).sqrt();
    Complex::new(re, if w.im < T::zero() { -im } else { im })
}

fn horner<T: Real>(coef: &[T], y: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::new(T::zero(), T::zero());
    let mut d = Complex::new(T::zero(), T::zero());
    for &c in coef.iter().rev() {
        d = d * y + p;
        p = p * y + Complex::new(c, T::zero());
    }
    (p, d)
}

/// Roots of `sum_k C(N-1+k, k) y^k`, seeded from the companion matrix in f64
/// and polished by Newton steps in `T`.
fn daubechies_poly_roots<T: Real>(order: usize) -> Result<Vec<Complex<T>>> {
    let deg = order - 1;
    let coef_f: Vec<f64> = (0..order).map(|k| binomial((order - 1 + k) as u64, k as u64)).collect();
    let coef: Vec<T> = coef_f.iter().map(|&c| T::c(c)).collect();
    let lead = coef_f[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coef_f[i] / lead;
    }
    let seeds = comp.complex_eigenvalues();
    let mut roots = Vec::with_capacity(deg);
    for s in seeds.iter() {
        let mut y = Complex::new(T::c(s.re), T::c(s.im));
        for _ in 0..60 {
            let (p, d) = horner(&coef, y);
            if d.norm_sqr() == T::zero() {
                break;
            }
            let step = p / d;
            y = y - step;
            if step.norm_sqr().sqrt() <= T::unit_roundoff() * T::c(8.0) * y.norm_sqr().sqrt() {
                break;
            }
        }
        let (p, _) = horner(&coef, y);
        let scale: f64 = coef_f.iter().enumerate().map(|(k, c)| c * y.norm_sqr().sqrt().f().powi(k as i32)).sum();
        if !(p.norm_sqr().sqrt().f() <= acceptance::<T>() * scale) {
            return Err(LabError::Factorization {
                order,
                reason: format!("root polish stalled at |P| = {:e}", p.norm_sqr().sqrt().f()),
            });
        }
        roots.push(y);
    }
    Ok(roots)
}

/// Extremal-phase Daubechies filter with `order` vanishing moments,
/// normalized to `sum h_k = sqrt(2)`.
/// Roots and expansion run in double-double; the result is rounded to `T`.
pub fn daubechies_filter<T: Real>(order: usize) -> Result<Vec<T>> {
    let h = filter_in::<DoubleDouble>(order)?;
    Ok(h.iter().map(|x| T::c(x.hi()) + T::c(x.lo())).collect())
}

fn filter_in<T: Real>(order: usize) -> Result<Vec<T>> {
    if order < 1 {
        return Err(LabError::invalid("order must be positive"));
    }
    if order > MAX_ORDER {
        return Err(LabError::Factorization {
            order,
            reason: format!("orders above {MAX_ORDER} are numerically unreliable"),
        });
    }
    let one = Complex::new(T::one(), T::zero());
    let mut poly = vec![one];
    let mul_linear = |poly: &mut Vec<Complex<T>>, root: Complex<T>| {
        // poly *= (z - root)
        let mut next = vec![Complex::new(T::zero(), T::zero()); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] = next[i + 1] + c;
            next[i] = next[i] - c * root;
        }
        *poly = next;
    };
    for _ in 0..order {
        mul_linear(&mut poly, -one);
    }
    if order > 1 {
        for y in daubechies_poly_roots::<T>(order)? {
            // z + 1/z = 2 - 4y; keep the root outside the unit circle.
            let c = one - y * T::c(2.0);
            let s = csqrt(c * c - one);
            let z1 = c + s;
            let z2 = c - s;
            let z = if z1.norm_sqr() > z2.norm_sqr() { z1 } else { z2 };
            mul_linear(&mut poly, z);
        }
    }
    let mut h: Vec<T> = poly.iter().map(|c| c.re).collect();
    let sum = h.iter().fold(T::zero(), |a, &b| a + b);
    let norm = T::SQRT_2() / sum;
    for x in &mut h {
        *x = *x * norm;
    }
    let defect = orthonormality_defect(&h);
    if !(defect < acceptance::<T>()) {
        return Err(LabError::Factorization { order, reason: format!("orthonormality defect {defect:e}") });
    }
    Ok(h)
}

/// `max_m |sum_k h_k h_{k+2m} - delta_m|`.
pub fn orthonormality_defect<T: Real>(h: &[T]) -> f64 {
    let n = h.len();
    let mut worst = 0.0f64;
    for m in 0..n / 2 {
        let mut s = T::zero();
        for k in 0..n.saturating_sub(2 * m) {
            s = s + h[k] * h[k + 2 * m];
        }
        let target = if m == 0 { T::one() } else { T::zero() };
        worst = worst.max((s - target).abs().f());
    }
    worst
}

/// High-pass filter `g_k = (-1)^k h_{1-k}` as (first index, coefficients).
pub fn highpass<T: Real>(h: &[T]) -> (i64, Vec<T>) {
    let n = h.len() as i64;
    let first = 2 - n;
    let g = (first..=1)
        .map(|k| {
            let v = h[(1 - k) as usize];
            if k.rem_euclid(2) == 0 {
                v
            } else {
                -v
            }
        })
        .collect();
    (first, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DoubleDouble;
    use num_traits::Float;

    #[test]
    fn order_two_matches_closed_form() {
        let h = daubechies_filter::<f64>(2).unwrap();
        let s3 = 3f64.sqrt();
        let d = 4.0 * 2f64.sqrt();
        let expect = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        for (a, b) in h.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn order_four_matches_reference_table() {
        // Widely tabulated db4 decomposition low-pass filter (reversed order).
        let reference = [
            0.2303778133088964,
            0.7148465705529154,
            0.6308807679298587,
            -0.0279837694168599,
            -0.1870348117190931,
            0.0308413818355607,
            0.0328830116668852,
            -0.0105974017850690,
        ];
        let h = daubechies_filter::<f64>(4).unwrap();
        for (a, b) in h.iter().zip(reference) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn order_twenty_is_orthonormal_in_both_precisions() {
        let h = daubechies_filter::<f64>(20).unwrap();
        assert_eq!(h.len(), 40);
        assert!(orthonormality_defect(&h) < 1e-13);
        let hd = daubechies_filter::<DoubleDouble>(20).unwrap();
        assert!(orthonormality_defect(&hd) < 1e-28);
        for (a, b) in h.iter().zip(&hd) {
            assert!((a - b.hi()).abs() < 1e-13);
        }
    }

    #[test]
    fn filter_moments_vanish() {
        // sum_k (-1)^k k^m h_k = 0 for m < N.
        let hd = daubechies_filter::<DoubleDouble>(20).unwrap();
        for m in 0..20 {
            let mut s = DoubleDouble::new(0.0);
            let mut scale = 0.0f64;
            for (k, &c) in hd.iter().enumerate() {
                let t = c * DoubleDouble::new(k as f64).powi(m);
                s = if k % 2 == 0 { s + t } else { s - t };
                scale += t.hi().abs();
            }
            assert!(s.hi().abs() < 1e-26 * scale.max(1.0), "m={m}");
        }
    }

    #[test]
    fn too_large_order_rejected() {
        assert!(matches!(daubechies_filter::<f64>(41), Err(LabError::Factorization { .. })));
    }
}
