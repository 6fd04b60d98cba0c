//! Pointwise evaluation by adaptive Gauss-Legendre quadrature.

use crate::error::{LabError, Result};
use crate::quadrature::{integrate_adaptive_floor, AdaptiveOptions, GaussLegendre};
use crate::scalar::Real;
use crate::wavelet::WaveletSpec;

use super::{check_alpha, check_v, dual_prefactor, DEFAULT_Q_MAX, MAX_P};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    /// `∫_{-inf}^x (x-s)^e ...`
    Left,
    /// `∫_x^{inf} (s-x)^e ...`
    Right,
}

pub struct DirectKernel<'a, T> {
    pub wavelet: &'a WaveletSpec<T>,
    pub alpha: f64,
    pub q_max: usize,
    pub opts: AdaptiveOptions,
    rule: GaussLegendre<T>,
    /// `max |psi^(r)|` per derivative order, for absolute tolerance floors.
    peaks: Vec<T>,
}

impl<'a, T: Real> DirectKernel<'a, T> {
    pub fn new(wavelet: &'a WaveletSpec<T>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            wavelet,
            alpha,
            q_max: DEFAULT_Q_MAX,
            opts: AdaptiveOptions::default(),
            rule: GaussLegendre::new(32),
            peaks: wavelet.table.psi.iter().map(|r| r.iter().fold(T::zero(), |m, v| m.max(v.abs()))).collect(),
        })
    }

    pub fn with_options(mut self, opts: AdaptiveOptions) -> Self {
        self.opts = opts;
        self
    }

    /// `∂_x^p ∂_v^q Psi(x, v)`.
    pub fn kernel_psi(&self, x: T, v: f64, p: usize, q: usize) -> Result<T> {
        check_v(v, self.alpha)?;
        if p > MAX_P || p > self.wavelet.max_derivative + 1 {
            return Err(LabError::invalid(format!("x-derivative order {p} is not available")));
        }
        if q > self.q_max {
            return Err(LabError::invalid(format!("v-derivative order {q} exceeds {}", self.q_max)));
        }
        let (lo, _) = self.wavelet.support();
        if x.f() <= lo {
            return Ok(T::zero());
        }
        let beta = T::c(v - 1.0 / self.alpha);
        if p == 0 {
            return self.power_log(Side::Left, beta, q, 0, x);
        }
        // Move one derivative onto the kernel:
        // ∂_x[(x-s)^b log^q] = (x-s)^(b-1) (b log^q + q log^(q-1)).
        let e = beta - T::one();
        let mut out = beta * self.power_log(Side::Left, e, q, p - 1, x)?;
        if q > 0 {
            out = out + T::from_int(q as i64) * self.power_log(Side::Left, e, q - 1, p - 1, x)?;
        }
        Ok(out)
    }

    /// Dual kernel `[Gamma(v+1-1/alpha) Gamma(1/alpha-v+1)]^-1 ∫ (s-x)_+^(1/alpha-v) psi''(s) ds`.
    pub fn dual_kernel(&self, x: T, v: f64) -> Result<T> {
        check_v(v, self.alpha)?;
        if self.wavelet.max_derivative < 2 {
            return Err(LabError::invalid("dual kernel needs the second derivative of psi"));
        }
        let (_, hi) = self.wavelet.support();
        if x.f() >= hi {
            return Ok(T::zero());
        }
        let e = T::c(1.0 / self.alpha - v);
        Ok(T::c(dual_prefactor(v, self.alpha)) * self.power_log(Side::Right, e, 0, 2, x)?)
    }

    /// `∫ y^e log^c(y) psi^(r)(x ∓ y) dy` over `y > 0`, `e > -1`.
    fn power_log(&self, side: Side, e: T, c: usize, r: usize, x: T) -> Result<T> {
        let (lo, hi) = self.wavelet.support();
        let (lo, hi) = (T::c(lo), T::c(hi));
        // Range of y where psi^(r)(x ∓ y) can be nonzero.
        let (y_start, y_end) = match side {
            Side::Left => ((x - hi).max(T::zero()), x - lo),
            Side::Right => ((lo - x).max(T::zero()), hi - x),
        };
        if y_end <= T::zero() {
            return Ok(T::zero());
        }
        let w = self.wavelet;
        let f = |y: T| match side {
            Side::Left => w.psi_eval(x - y, r),
            Side::Right => w.psi_eval(x + y, r),
        };
        let mu = e + T::one();
        let logc = |y: T| y.rln().powi(c as i32);

        // Values far below the kernel's O(1) scale need no relative accuracy.
        let abs_floor = T::c(1e-3 * self.opts.rtol) * self.peaks[r] * w.amplitude.abs();
        let delta = T::one().min(y_end);
        // Far part: integrand smooth for y >= delta.
        let far_lo = delta.max(y_start);
        let far = if y_end > far_lo {
            integrate_adaptive_floor(
                &self.rule,
                &mut |y: T| (e * y.rln()).rexp() * logc(y) * f(y),
                far_lo,
                y_end,
                self.opts,
                abs_floor,
            )?
        } else {
            T::zero()
        };
        if y_start >= delta {
            return Ok(far);
        }
        // Near part: f(0) times the exact integral of y^e log^c y on [0, delta],
        // plus the remainder under y = delta t^4, whose integrand vanishes to
        // order t^(4e+7) at the origin.
        const M: i32 = 4;
        let m = T::from_int(M as i64);
        let f0 = f(T::zero());
        let ld = delta.rln();
        let mut closed = T::zero();
        let mut fall = T::one();
        for i in 0..=c {
            if i > 0 {
                fall = fall * T::from_int((c - i + 1) as i64);
            }
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            closed = closed + sign * fall * ld.powi((c - i) as i32) / mu.powi(i as i32 + 1);
        }
        let dmu = (mu * ld).rexp();
        closed = closed * dmu * f0;
        let floor = (T::c(self.opts.rtol) * T::c(1e-2) * (far.abs() + closed.abs())).max(abs_floor);
        let near = integrate_adaptive_floor(
            &self.rule,
            &mut |t: T| {
                if t <= T::zero() {
                    return T::zero();
                }
                let lt = t.rln();
                let y = delta * t.powi(M);
                m * dmu * ((m * mu - T::one()) * lt).rexp() * (ld + m * lt).powi(c as i32) * (f(y) - f0)
            },
            T::zero(),
            T::one(),
            self.opts,
            floor,
        )?;
        Ok(closed + near + far)
    }
}
