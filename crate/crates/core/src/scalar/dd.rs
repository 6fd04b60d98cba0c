//! Double-double scalar built on `twofloat` arithmetic.
//!
//! `TwoFloat` supplies error-free addition and multiplication, but its
//! division loses about half of the low word and its elementary functions
//! are only good to ~1e-15. This wrapper replaces division and the
//! functions used by the library with versions accurate to ~1e-31.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use twofloat::TwoFloat;

#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleDouble(TwoFloat);

const SERIES_EPS: f64 = 1e-33;

#[inline]
fn tf(x: f64) -> TwoFloat {
    <TwoFloat as From<f64>>::from(x)
}

impl DoubleDouble {
    #[inline]
    pub fn new(x: f64) -> Self {
        DoubleDouble(tf(x))
    }

    pub fn from_parts(hi: f64, lo: f64) -> Self {
        DoubleDouble(TwoFloat::new_add(hi, lo))
    }

    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }

    pub fn inner(self) -> TwoFloat {
        self.0
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble(tf(x))
    }
}

fn div_tf(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    if !q1.is_finite() || b.hi() == 0.0 {
        return tf(q1);
    }
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

fn exp_tf(x: TwoFloat) -> TwoFloat {
    if x.hi().is_nan() {
        return x;
    }
    if x.hi() > 709.0 {
        return tf(f64::INFINITY);
    }
    if x.hi() < -745.0 {
        return tf(0.0);
    }
    let k = (x.hi() / std::f64::consts::LN_2).round();
    let r = x - TwoFloat::LN_2() * k;
    // expm1 on r / 2^10 by Taylor series, then (1 + t)^2 - 1 = t (2 + t)
    // ten times so small results keep their relative precision.
    let y = r * (1.0 / 1024.0);
    let mut term = y;
    let mut t = y;
    let mut n = 1.0;
    loop {
        n += 1.0;
        term = div_tf(term * y, tf(n));
        t += term;
        if term.hi().abs() <= SERIES_EPS * t.hi().abs() {
            break;
        }
    }
    for _ in 0..10 {
        t = t * (t + 2.0);
    }
    (t + 1.0) * 2f64.powi(k as i32)
}

fn ln_tf(x: TwoFloat) -> TwoFloat {
    if x.hi() < 0.0 || x.hi().is_nan() {
        return tf(f64::NAN);
    }
    if x.hi() == 0.0 {
        return tf(f64::NEG_INFINITY);
    }
    if x.hi().is_infinite() {
        return x;
    }
    // Newton on exp(y) = x; each step doubles the number of correct digits.
    let mut y = tf(x.hi().ln());
    for _ in 0..2 {
        y = y + x * exp_tf(-y) - 1.0;
    }
    y
}

fn sin_cos_reduced(r: TwoFloat) -> (TwoFloat, TwoFloat) {
    let r2 = r * r;
    let mut s = r;
    let mut term = r;
    let mut c = tf(1.0);
    let mut cterm = tf(1.0);
    let mut n = 1.0;
    loop {
        cterm = -div_tf(cterm * r2, tf(n * (n + 1.0)));
        term = -div_tf(term * r2, tf((n + 1.0) * (n + 2.0)));
        c += cterm;
        s += term;
        n += 2.0;
        if term.hi().abs() < SERIES_EPS && cterm.hi().abs() < SERIES_EPS {
            break;
        }
    }
    (s, c)
}

fn sin_cos_tf(x: TwoFloat) -> (TwoFloat, TwoFloat) {
    if !x.hi().is_finite() {
        return (tf(f64::NAN), tf(f64::NAN));
    }
    let k = (x.hi() / std::f64::consts::FRAC_PI_2).round();
    // pi/2 to about 160 bits as three doubles keeps the reduction exact for
    // the moderate arguments used here.
    const P1: f64 = std::f64::consts::FRAC_PI_2;
    const P2: f64 = 6.123_233_995_736_766e-17;
    const P3: f64 = -1.497_384_904_859_169_9e-33;
    let r = x - TwoFloat::new_mul(k, P1) - TwoFloat::new_mul(k, P2) - k * P3;
    let (s, c) = sin_cos_reduced(r);
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $body:expr) => {
        impl $tr for DoubleDouble {
            type Output = DoubleDouble;
            #[inline]
            fn $m(self, rhs: DoubleDouble) -> DoubleDouble {
                let f: fn(TwoFloat, TwoFloat) -> TwoFloat = $body;
                DoubleDouble(f(self.0, rhs.0))
            }
        }
        impl $tr<f64> for DoubleDouble {
            type Output = DoubleDouble;
            #[inline]
            fn $m(self, rhs: f64) -> DoubleDouble {
                self.$m(DoubleDouble::new(rhs))
            }
        }
        impl $atr for DoubleDouble {
            #[inline]
            fn $am(&mut self, rhs: DoubleDouble) {
                *self = (*self).$m(rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, |a, b| a + b);
binop!(Sub, sub, SubAssign, sub_assign, |a, b| a - b);
binop!(Mul, mul, MulAssign, mul_assign, |a, b| a * b);
binop!(Div, div, DivAssign, div_assign, div_tf);

impl Rem for DoubleDouble {
    type Output = DoubleDouble;
    fn rem(self, rhs: DoubleDouble) -> DoubleDouble {
        let q = (self / rhs).trunc();
        self - q * rhs
    }
}

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn neg(self) -> DoubleDouble {
        DoubleDouble(-self.0)
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::LowerExp for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerExp::fmt(&self.0, f)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble(tf(0.0))
    }
    fn is_zero(&self) -> bool {
        self.0.hi() == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble(tf(1.0))
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        <f64 as Num>::from_str_radix(s, radix).map(DoubleDouble::new)
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.0.hi() + self.0.lo())
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        Some(DoubleDouble(<TwoFloat as From<i64>>::from(n)))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(DoubleDouble(<TwoFloat as From<u64>>::from(n)))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(DoubleDouble(tf(n)))
    }
}

impl NumCast for DoubleDouble {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(DoubleDouble::new)
    }
}

macro_rules! consts {
    ($($name:ident),*) => {
        $(fn $name() -> Self { DoubleDouble(<TwoFloat as FloatConst>::$name()) })*
    };
}

impl FloatConst for DoubleDouble {
    consts!(
        E,
        FRAC_1_PI,
        FRAC_1_SQRT_2,
        FRAC_2_PI,
        FRAC_2_SQRT_PI,
        FRAC_PI_2,
        FRAC_PI_3,
        FRAC_PI_4,
        FRAC_PI_6,
        FRAC_PI_8,
        LN_10,
        LN_2,
        LOG10_E,
        LOG2_E,
        PI,
        SQRT_2
    );
}

macro_rules! delegate {
    ($($name:ident),*) => {
        $(fn $name(self) -> Self { DoubleDouble(<TwoFloat as Float>::$name(self.0)) })*
    };
}

impl Float for DoubleDouble {
    fn nan() -> Self {
        DoubleDouble(tf(f64::NAN))
    }
    fn infinity() -> Self {
        DoubleDouble(tf(f64::INFINITY))
    }
    fn neg_infinity() -> Self {
        DoubleDouble(tf(f64::NEG_INFINITY))
    }
    fn neg_zero() -> Self {
        DoubleDouble(tf(-0.0))
    }
    fn min_value() -> Self {
        DoubleDouble(tf(f64::MIN))
    }
    fn min_positive_value() -> Self {
        DoubleDouble(tf(f64::MIN_POSITIVE))
    }
    fn epsilon() -> Self {
        DoubleDouble(tf(2f64.powi(-104)))
    }
    fn max_value() -> Self {
        DoubleDouble(tf(f64::MAX))
    }
    fn is_nan(self) -> bool {
        self.0.hi().is_nan()
    }
    fn is_infinite(self) -> bool {
        self.0.hi().is_infinite()
    }
    fn is_finite(self) -> bool {
        self.0.hi().is_finite()
    }
    fn is_normal(self) -> bool {
        self.0.hi().is_normal()
    }
    fn classify(self) -> FpCategory {
        self.0.hi().classify()
    }
    delegate!(floor, ceil, round, trunc, abs, signum, sqrt, cbrt, asin, acos, atan, asinh, acosh, atanh);
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn is_sign_positive(self) -> bool {
        self.0.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.0.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }
    fn powf(self, n: Self) -> Self {
        if self.0.hi() == 0.0 {
            return if n.0.hi() > 0.0 { Self::zero() } else { Self::infinity() };
        }
        DoubleDouble(exp_tf(n.0 * ln_tf(self.0)))
    }
    fn exp(self) -> Self {
        DoubleDouble(exp_tf(self.0))
    }
    fn exp2(self) -> Self {
        DoubleDouble(exp_tf(self.0 * TwoFloat::LN_2()))
    }
    fn ln(self) -> Self {
        DoubleDouble(ln_tf(self.0))
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / Self::LN_2()
    }
    fn log10(self) -> Self {
        self.ln() / Self::LN_10()
    }
    fn max(self, other: Self) -> Self {
        if self >= other || other.is_nan() {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self <= other || other.is_nan() {
            self
        } else {
            other
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Self::zero()
        }
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }
    fn sin(self) -> Self {
        DoubleDouble(sin_cos_tf(self.0).0)
    }
    fn cos(self) -> Self {
        DoubleDouble(sin_cos_tf(self.0).1)
    }
    fn tan(self) -> Self {
        let (s, c) = sin_cos_tf(self.0);
        DoubleDouble(div_tf(s, c))
    }
    fn atan2(self, other: Self) -> Self {
        DoubleDouble(self.0.atan2(other.0))
    }
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = sin_cos_tf(self.0);
        (DoubleDouble(s), DoubleDouble(c))
    }
    fn exp_m1(self) -> Self {
        self.exp() - Self::one()
    }
    fn ln_1p(self) -> Self {
        (self + Self::one()).ln()
    }
    fn sinh(self) -> Self {
        let e = self.exp();
        (e - e.recip()) * 0.5
    }
    fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()) * 0.5
    }
    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.0.hi().integer_decode()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: DoubleDouble, b: DoubleDouble) -> f64 {
        ((a - b) / b).hi().abs()
    }

    // References from 50-digit arithmetic, split as hi + lo.
    #[test]
    fn division_is_full_precision() {
        let x = DoubleDouble::new(2.0) / DoubleDouble::new(3.0);
        assert!((x * 3.0 - 2.0).hi().abs() < 1e-31);
        let third = DoubleDouble::from_parts(0.3333333333333333, 1.850371707708594e-17);
        assert!(rel(DoubleDouble::new(1.0) / DoubleDouble::new(3.0), third) < 1e-31);
    }

    #[test]
    fn exp_and_ln_match_reference() {
        let e = DoubleDouble::new(1.0).exp();
        assert!(rel(e, DoubleDouble::E()) < 1e-30);
        let v = DoubleDouble::new(-3.25).exp();
        let expect = DoubleDouble::from_parts(0.03877420783172201, 1.1433418851841824e-18);
        assert!(rel(v, expect) < 1e-30);
        for &x in &[1e-8, 0.3, 1.0, 2.5, 1234.5] {
            let t = DoubleDouble::new(x);
            assert!(rel(t.ln().exp(), t) < 1e-30, "x={x}");
        }
        assert!(rel(DoubleDouble::new(2.0).ln(), DoubleDouble::LN_2()) < 1e-30);
    }

    #[test]
    fn powf_matches_reference() {
        // Exponent is the double nearest 0.3.
        let v = DoubleDouble::new(2.0).powf(DoubleDouble::new(0.3));
        let expect = DoubleDouble::from_parts(1.2311444133449163, -3.572339831433251e-17);
        assert!(rel(v, expect) < 1e-30, "{:e}", rel(v, expect));
        let s = DoubleDouble::new(2.0).powf(DoubleDouble::new(0.5));
        assert!(rel(s, DoubleDouble::SQRT_2()) < 1e-30);
    }

    #[test]
    fn trig_matches_reference() {
        // sin of the double nearest 100.3 = -0.2289169224452067...
        let (s, c) = DoubleDouble::new(100.3).sin_cos();
        let expect = DoubleDouble::from_parts(-0.22891692244520673, 2.6396031437971418e-18);
        assert!(rel(s, expect) < 1e-29, "{:e}", rel(s, expect));
        assert!((s * s + c * c - 1.0).hi().abs() < 1e-30);
        let (s, _) = DoubleDouble::PI().sin_cos();
        assert!(s.hi().abs() < 1e-31);
        let (s, _) = (DoubleDouble::PI() / DoubleDouble::new(6.0)).sin_cos();
        assert!((s - 0.5).hi().abs() < 1e-31);
    }

    #[test]
    fn negative_powers() {
        let x = DoubleDouble::new(3.0).powi(-2);
        assert!((x * 9.0 - 1.0).hi().abs() < 1e-31);
    }
}
