//! Fourier transform of the wavelet through the infinite product formula.

use num_complex::Complex;

use crate::scalar::Real;

/// `(1/sqrt 2) sum_k c_k e^{-i (first + k) w}`.
fn symbol<T: Real>(c: &[T], first: i64, w: T) -> Complex<T> {
    let step = w.cis_neg();
    let mut z = (w * T::from_int(first)).cis_neg();
    let mut s = Complex::new(T::zero(), T::zero());
    for &ck in c {
        s = s + z * ck;
        z = z * step;
    }
    s * T::FRAC_1_SQRT_2()
}

/// `psi_hat(xi) = m1(xi/2) prod_{j>=2} m0(xi/2^j)` with the convention
/// `psi_hat(xi) = ∫ e^{-i xi x} psi(x) dx`.
pub fn psi_hat<T: Real>(h: &[T], g: &[T], g_first: i64, xi: T) -> Complex<T> {
    let half = T::c(0.5);
    let mut w = xi * half;
    let mut out = symbol(g, g_first, w);
    // m0(w) = 1 + O(w), so the product has converged once |w| * sum k|h_k|
    // drops below the unit roundoff.
    let moment: f64 = h.iter().enumerate().map(|(k, c)| k as f64 * c.abs().f()).sum::<f64>() + 1.0;
    let eps = T::unit_roundoff().f() * 0.25;
    for _ in 0..400 {
        w = w * half;
        if w.abs().f() * moment < eps {
            break;
        }
        out = out * symbol(h, 0, w);
    }
    out
}
