use super::*;
use crate::scalar::DoubleDouble;
use std::sync::OnceLock;

fn w64() -> &'static WaveletSpec<f64> {
    static W: OnceLock<WaveletSpec<f64>> = OnceLock::new();
    W.get_or_init(|| build_wavelet::<f64>(20).unwrap())
}

#[test]
fn rejects_orders_below_floor() {
    assert!(matches!(build_wavelet::<f64>(14), Err(LabError::InvalidParameter(_))));
}

#[test]
fn filter_sums_to_sqrt_two() {
    let s: f64 = w64().filter.iter().sum();
    assert!((s - 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn zero_outside_support() {
    let w = w64();
    let r = w.support_radius;
    assert!(r > 1.0);
    for p in 0..=3 {
        assert_eq!(w.psi_eval(r + 0.1, p), 0.0);
        assert_eq!(w.psi_eval(-r - 0.1, p), 0.0);
        assert_eq!(w.psi_eval(20.0 + 1e-9, p), 0.0);
    }
}

#[test]
fn first_derivative_matches_finite_difference() {
    let w = w64();
    let step = 1e-5;
    for i in 0..100 {
        let x = -18.5 + 37.0 * i as f64 / 99.0;
        let fd = (w.psi_eval(x + step, 0) - w.psi_eval(x - step, 0)) / (2.0 * step);
        let d = w.psi_eval(x, 1);
        assert!((fd - d).abs() < 1e-4, "x={x} fd={fd} d={d}");
    }
}

#[test]
fn derivative_tables_are_consistent_at_nodes() {
    // The third derivative is only Holder continuous, so compare on the
    // dyadic nodes against the largest value rather than pointwise.
    let w = w64();
    let t = &w.table;
    let step = 0.5f64.powi(t.level as i32);
    for p in 0..3 {
        let scale = t.psi[p + 1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 1..t.psi[p].len() - 1 {
            let fd = (t.psi[p][i + 1] - t.psi[p][i - 1]) / (2.0 * step);
            worst = worst.max((fd - t.psi[p + 1][i]).abs());
        }
        assert!(worst < 1e-3 * scale, "p={p} worst={worst} scale={scale}");
    }
}

#[test]
fn integer_translates_are_orthonormal() {
    let w = w64();
    let t = &w.table;
    let h = t.step();
    let stride = 1i64 << t.level;
    for k in -5i64..=5 {
        let mut s = 0.0;
        for (j, &v) in t.psi[0].iter().enumerate() {
            s += v * t.node(0, t.psi_first + j as i64 - k * stride);
        }
        s *= h;
        let target = if k == 0 { 1.0 } else { 0.0 };
        assert!((s - target).abs() < 1e-6, "k={k} inner={s}");
    }
}

#[test]
fn unit_l2_norm() {
    let w = w64();
    let n2 = w.lalpha_norm(2.0).unwrap();
    assert!((n2 - 1.0).abs() < 1e-8);
}

#[test]
fn moments_vanish_to_order_n_in_double_double() {
    let w = WaveletSpec::<DoubleDouble>::unchecked(20, 8).unwrap();
    for m in 0..20 {
        let v = w.moment(m);
        assert!(v.hi().abs() < 1e-8, "m={m} moment={:e}", v.hi());
    }
    assert!(w.moment(20).hi().abs() > 1e-3);
}

#[test]
fn low_moments_vanish_in_f64() {
    let w = w64();
    for m in 0..8 {
        assert!(w.moment(m).abs() < 1e-8, "m={m}");
    }
}

#[test]
fn third_derivative_max_is_stable_under_refinement() {
    let coarse = w64();
    let fine = build_wavelet_at_level::<f64>(20, DEFAULT_LEVEL + 1).unwrap();
    let max = |w: &WaveletSpec<f64>| w.table.psi[3].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (a, b) = (max(coarse), max(&fine));
    assert!(a.is_finite() && b.is_finite());
    assert!(((a - b) / a).abs() < 1e-3, "{a} vs {b}");
}

#[test]
fn fourier_transform_at_zero_vanishes() {
    let w = w64();
    assert!(w.psi_hat(0.0).norm() < 1e-15);
}

#[test]
fn fourier_transform_is_hermitian() {
    let w = w64();
    for &xi in &[0.7, 2.0, 5.5, 11.0] {
        let a = w.psi_hat(xi);
        let b = w.psi_hat(-xi);
        assert!((a - b.conj()).norm() < 1e-14);
    }
}

#[test]
fn littlewood_paley_partition_at_pi() {
    let w = w64();
    let s: f64 = (-60..=60).map(|j| w.psi_hat(2f64.powi(j) * std::f64::consts::PI).norm_sqr()).sum();
    assert!((s - 1.0).abs() < 1e-6, "sum={s}");
}

#[test]
fn fourier_transform_matches_sampled_integral() {
    let w = w64();
    let h = w.table.step();
    for &xi in &[1.3, 3.0, 6.1] {
        let mut acc = num_complex::Complex::new(0.0, 0.0);
        for (j, &v) in w.table.psi[0].iter().enumerate() {
            let x = (w.table.psi_first + j as i64) as f64 * h;
            acc += num_complex::Complex::from_polar(v * h, -xi * x);
        }
        let direct = w.psi_hat(xi);
        assert!((acc - direct).norm() < 1e-10, "xi={xi}");
    }
}

#[test]
fn amplitude_hook_scales_evaluations() {
    let w = build_wavelet::<f64>(20).unwrap().with_amplitude(3.0);
    assert!((w.psi_eval(0.37, 0) - 3.0 * w64().psi_eval(0.37, 0)).abs() < 1e-14);
}

#[test]
fn double_double_table_agrees_with_f64() {
    let wd = WaveletSpec::<DoubleDouble>::unchecked(20, 6).unwrap();
    let w = w64();
    let stride = 1usize << (w.table.level - 6);
    for (j, v) in wd.table.psi[1].iter().enumerate() {
        let r = w.table.psi[1][j * stride];
        assert!((v.hi() - r).abs() < 1e-11);
    }
}
