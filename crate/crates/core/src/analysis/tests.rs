use super::*;
use crate::kernel::{build_kernel_table, KernelTable, TableGrid};
use crate::stable::{CoefficientField, StableParams};
use crate::synthesis::{lmsm_path, FieldSample, HurstFunction, SynthesisMeta, TruncationSpec};
use crate::wavelet::build_wavelet;
use crate::Wavelet;
use proptest::prelude::*;
use std::sync::OnceLock;

fn wavelet() -> &'static Wavelet {
    static W: OnceLock<Wavelet> = OnceLock::new();
    W.get_or_init(|| build_wavelet::<f64>(20).unwrap())
}

fn table() -> &'static KernelTable {
    static T: OnceLock<KernelTable> = OnceLock::new();
    T.get_or_init(|| build_kernel_table(wavelet(), &TableGrid::standard(1.5, 20)).unwrap())
}

fn field(alpha: f64, seed: u64) -> CoefficientField {
    CoefficientField::new(StableParams::new(alpha, 0.0, 1.0).unwrap(), seed, wavelet()).unwrap()
}

fn unit_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

#[test]
fn cusp_exponent_is_recovered() {
    let t = unit_grid(1 << 14);
    let y: Vec<f64> = t.iter().map(|&x| (x - 0.5f64).abs().powf(0.3)).collect();
    let e = uniform_holder(&t, &y, (0.0, 1.0)).unwrap();
    assert!((e.exponent - 0.3).abs() < 0.02, "{e:?}");
    assert!(!e.clamped && e.mode == HolderMode::UniformInterval);
    assert!(e.scale_range.0 >= 4.0 / (1 << 14) as f64 - 1e-15 && e.scale_range.1 <= 0.125 + 1e-12);
}

#[test]
fn affine_signal_is_lipschitz() {
    let t = unit_grid(1 << 12);
    let y: Vec<f64> = t.iter().map(|&x| 3.0 - 2.0 * x).collect();
    let e = uniform_holder(&t, &y, (0.0, 1.0)).unwrap();
    assert!(e.exponent >= 0.98, "{e:?}");
}

#[test]
fn oscillation_matches_brute_force() {
    let y: Vec<f64> = (0..97).map(|i| ((i * 37 % 11) as f64 - 5.0) * (i as f64).sin()).collect();
    for (lag, osc) in dyadic_oscillations(&y, 64) {
        let mut want = 0.0f64;
        for a in 0..y.len() {
            for b in a..y.len().min(a + lag + 1) {
                want = want.max((y[a] - y[b]).abs());
            }
        }
        assert_eq!(osc, want, "lag {lag}");
    }
}

#[test]
fn estimator_rejects_flat_and_sparse_input() {
    let t = unit_grid(2048);
    let flat = vec![1.0; t.len()];
    assert!(matches!(uniform_holder(&t, &flat, (0.0, 1.0)), Err(crate::LabError::InsufficientScales { .. })));
    let y: Vec<f64> = t.iter().map(|x| x.sqrt()).collect();
    assert!(uniform_holder(&t, &y, (0.0, 0.25)).is_err());
    let mut uneven = t.clone();
    uneven[100] += 1e-4;
    assert!(uniform_holder(&uneven, &y, (0.0, 1.0)).is_err());
}

#[test]
fn local_exponent_of_a_cusp() {
    let t = unit_grid(1 << 14);
    let y: Vec<f64> = t.iter().map(|&x| (x - 0.5f64).abs().powf(0.4) + 0.2 * x).collect();
    let e = local_holder(&t, &y, 0.5, 4).unwrap();
    assert!((e.exponent - 0.4).abs() < 0.03, "{e:?}");
    assert_eq!(e.mode, HolderMode::LocalPoint);
    let st = e.stabilization.unwrap();
    assert_eq!(st.levels.len(), 4);
    assert!(local_holder(&t, &y, 1.0, 4).is_err());
}

#[test]
fn modulus_of_constant_path_is_zero() {
    let t = unit_grid(64);
    let y = vec![2.5; t.len()];
    let h = HurstFunction::constant(0.8);
    assert_eq!(modulus_ratio_global(&t, &y, &h, 1.5, (0.0, 1.0), 0.5).unwrap().ratio_sup, 0.0);
    assert_eq!(modulus_ratio_local(&t, &y, &h, 1.5, 0.5, (0.0, 1.0), 0.0).unwrap().ratio_sup, 0.0);
    assert!(modulus_ratio_global(&t, &y, &h, 1.5, (0.0, 1.0), 0.0).is_err());
}

#[test]
fn constant_hurst_reduces_to_power_log() {
    let t = unit_grid(40);
    let y: Vec<f64> = t.iter().map(|&x| (7.0 * x).sin() + x * x).collect();
    let (alpha, eta, h) = (1.5, 0.5, 0.8);
    let r = modulus_ratio_global(&t, &y, &HurstFunction::constant(h), alpha, (0.0, 1.0), eta).unwrap();
    let mut want = 0.0f64;
    for i in 0..t.len() {
        for j in 0..t.len() {
            if i != j {
                let d = (t[i] - t[j]).abs();
                want = want.max(
                    (y[i] - y[j]).abs() / (d.powf(h - 1.0 / alpha) * (1.0 + d.ln().abs()).powf(2.0 / alpha + eta)),
                );
            }
        }
    }
    assert!((r.ratio_sup - want).abs() <= 1e-12 * want);
    assert_eq!(r.kind, DenominatorKind::GlobalThm);
    assert_eq!(r.pairs, 41 * 40 / 2);
}

#[test]
fn local_ratio_matches_enumeration_and_window() {
    let t = unit_grid(32);
    let y: Vec<f64> = t.iter().map(|&x| (x - 0.5f64).abs().sqrt()).collect();
    let hurst = HurstFunction::LinearClamped { t0: 0.0, h0: 0.7, slope: 0.2, lo: 0.7, hi: 0.9 };
    let (alpha, eta) = (1.5, 0.0);
    let r = modulus_ratio_local(&t, &y, &hurst, alpha, 0.5, (0.25, 0.75), eta).unwrap();
    let h0 = hurst.eval(0.5);
    let mut want = 0.0f64;
    for (&ti, &yi) in t.iter().zip(&y) {
        if (0.25..=0.75).contains(&ti) && ti != 0.5 {
            let d = (ti - 0.5f64).abs();
            let den = d.powf(h0) * (1.0 + d.ln().abs()).powf(1.0 / alpha + eta) + (hurst.eval(ti) - h0).abs();
            want = want.max((yi - y[16]).abs() / den);
        }
    }
    assert!((r.ratio_sup - want).abs() <= 1e-12 * want);
    assert!(r.argmax.0 >= 0.25 && r.argmax.0 <= 0.75);
    let single = modulus_ratio_local(&t, &y, &hurst, alpha, 0.5, (0.49, 0.51), eta).unwrap();
    assert_eq!(single.ratio_sup, 0.0);
}

#[test]
fn lower_modulus_uses_minimum_exponent() {
    let t = unit_grid(16);
    let y: Vec<f64> = t.clone();
    let hurst = HurstFunction::Smoothstep { t0: 0.0, t1: 1.0, h0: 0.75, h1: 0.95 };
    let r = modulus_ratio_lower(&t, &y, &hurst, 1.5, (0.0, 1.0), 0.0, 0.1).unwrap();
    let e = 0.75 - 1.0 / 1.5;
    let want = (0..t.len())
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| {
            let d = t[i] - t[j];
            d / (d.powf(e) * (1.0 + d.ln().abs()).powf(-0.1))
        })
        .fold(0.0f64, f64::max);
    assert!((r.ratio_sup - want).abs() <= 1e-12 * want);
    assert_eq!(r.kind, DenominatorKind::LowerOptimality);
}

fn fake_meta(alpha: f64) -> SynthesisMeta {
    SynthesisMeta {
        seed: 0,
        alpha,
        beta: 0.0,
        scale: 1.0,
        coef_scale: 1.0,
        wavelet_order: 20,
        truncation: TruncationSpec::default(),
        q: 0,
        terms: 0,
        shell_fraction: 0.0,
        shell_threshold: 1e-3,
        truncation_warning: false,
        table_v_range: (0.7, 0.99),
        table_x_max: 64.0,
    }
}

fn sample(u: &[f64], v: &[f64], f: impl Fn(f64, f64) -> f64) -> FieldSample {
    let values = u.iter().map(|&a| v.iter().map(|&b| f(a, b)).collect()).collect();
    FieldSample { u_grid: u.to_vec(), v_grid: v.to_vec(), q: 0, values, meta: fake_meta(1.5) }
}

#[test]
fn grid_norm_closed_forms() {
    let m = 1.5;
    let u: Vec<f64> = (0..9).map(|i| -m + 2.0 * m * i as f64 / 8.0).collect();
    let v = [0.75, 0.8, 0.9];
    let gamma = 0.04;
    let c = sample(&u, &v, |_, _| -2.25);
    assert_eq!(e_gamma_grid_norm(&c, gamma).unwrap().total, 2.25);
    let lin = sample(&u, &v, |a, _| a);
    let n = e_gamma_grid_norm(&lin, gamma).unwrap();
    let want = m + (2.0 * m).powf(1.0 - gamma);
    assert!((n.total - want).abs() < 1e-14, "{} {want}", n.total);
    assert_eq!((n.v_lipschitz, n.mixed), (0.0, 0.0));
    let prod = sample(&u, &v, |a, b| a * b);
    let p = grid_norm(&u, &v, &prod.values, 1.0).unwrap();
    assert!((p.mixed - 1.0).abs() < 1e-12 && (p.v_lipschitz - m).abs() < 1e-12);
    assert!(e_gamma_grid_norm(&lin, 0.1).is_err());
}

#[test]
fn probe_window_arithmetic() {
    assert!(window_exponents(1.5, 2.0, 1.0).is_err());
    let (d, e) = window_exponents(1.5, 2.0, 4.0).unwrap();
    let bound: f64 = (1.0 + 2.0 / 1.5 + 4.0) / 2.0;
    assert!((bound - 19.0 / 6.0).abs() < 1e-14);
    assert!((d - 37.0 / 9.0).abs() < 1e-12 && (e - 91.0 / 18.0).abs() < 1e-12);
    assert!(bound < d && d < e && e < 6.0);
    assert_eq!(tau_of(1.5, f64::INFINITY).unwrap(), 0.0);
    let (d, e) = window_exponents(1.5, f64::INFINITY, 0.01).unwrap();
    assert!((d - 0.005).abs() < 1e-15 && (e - 0.01).abs() < 1e-15);
    assert!(tau_of(1.5, 0.5).is_err());
    assert!((tau_of(1.5, 2.0).unwrap() - (7.0 / 3.0) / 2.0).abs() < 1e-15);
}

#[test]
fn index_window_matches_enumeration() {
    let (d, e) = (0.25, 0.5);
    for &(t0, iv) in &[(0.5, (0.0, 1.0)), (0.1, (0.0, 1.0)), (0.0, (0.0, 1.0)), (0.37, (-1.0, 2.0))] {
        for j in 1..=14i64 {
            let s = 2f64.powi(j as i32);
            let got: Vec<i64> = index_window(j, t0, iv, d, e).into_iter().flat_map(|(a, b)| a..=b).collect();
            let want: Vec<i64> = ((iv.0 * s) as i64 - 2..=(iv.1 * s) as i64 + 2)
                .filter(|&k| {
                    let x = k as f64 / s;
                    let dist = (t0 - x).abs();
                    x >= iv.0 && x <= iv.1 && dist >= (j as f64).powf(-e) && dist <= (j as f64).powf(-d)
                })
                .collect();
            assert_eq!(got, want, "t0={t0} j={j}");
        }
    }
}

#[test]
fn probe_reports_positive_statistics() {
    let f = field(1.5, 3);
    let r = optimality_probe(&f, 0.5, (0.0, 1.0), 0.5, f64::INFINITY, (4, 24), 1 << 12).unwrap();
    assert_eq!(r.levels.len(), 21);
    assert_eq!(r.trailing_from, 14);
    assert!(r.trailing_min > 0.0 && r.trailing_min.is_finite());
    assert!(r.trailing_is_lower_bound);
    for l in &r.levels {
        assert!(l.evaluated <= l.count && l.evaluated > 0);
        assert_eq!(l.lower_bound, l.evaluated < l.count);
        assert!(l.s_j_extrapolated >= l.s_j);
    }
    // A window narrower than the grid step leaves D_j empty.
    assert!(matches!(
        optimality_probe(&f, 0.5, (0.0, 1.0), 20.0, f64::INFINITY, (1, 3), 64),
        Err(crate::LabError::EmptyIndexSet(_))
    ));
}

#[test]
fn local_probe_constants_and_spacing() {
    assert_eq!(spacing_exponent(39.0), 7);
    assert_eq!(spacing_exponent(1.0), 3);
    assert!(spacing_check(0.5, 39.0, 10));
    assert!(spacing_check(-0.3, 39.0, 10));
    assert_eq!(probe_translation(0.5, 7, 39.0), 105.into());
    for &t0 in &[0.3, -0.7, 0.123456789] {
        for r in [0u32, 5, 21, 40] {
            let direct = (t0 * 2f64.powi(r as i32)).floor() + 41.0;
            assert_eq!(probe_translation(t0, r, 39.0), (direct as i64).into(), "t0={t0} r={r}");
        }
    }
    let big = probe_translation(0.5, 1400, 39.0);
    assert_eq!(big, (num_bigint::BigInt::from(1) << 1399usize) + 41);
    let f = field(1.5, 5);
    let rep = local_optimality_probe(&f, 0.5, 39.0, 200).unwrap();
    assert_eq!(rep.m0, 7);
    assert!(rep.levels[0].statistic.is_none());
    assert!(rep.levels.windows(2).all(|w| w[1].running_max >= w[0].running_max));
    assert_eq!(rep.levels[199].r, 1400);
}

#[test]
fn ks_reference_values() {
    assert!((kolmogorov_tail(1.3581) - 0.05).abs() < 2e-4);
    assert!((kolmogorov_tail(1.6276) - 0.01).abs() < 1e-4);
    let a: Vec<f64> = (0..200).map(|i| i as f64).collect();
    let same = ks_two_sample(&a, &a).unwrap();
    assert_eq!(same.statistic, 0.0);
    assert_eq!(same.p_value, 1.0);
    let b: Vec<f64> = a.iter().map(|x| x + 60.0).collect();
    let shifted = ks_two_sample(&a, &b).unwrap();
    assert!((shifted.statistic - 0.3).abs() < 1e-12 && shifted.p_value < 1e-6);
    assert_eq!(median(&[3.0, 1.0, 2.0, f64::NAN]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
}

#[test]
fn recovery_is_linear_in_the_path() {
    let t = table();
    let spec = TruncationSpec::new(1.0, 6).unwrap();
    let ts: Vec<f64> = (0..=512).map(|i| -1.0 + i as f64 / 256.0).collect();
    let h = HurstFunction::constant(0.8);
    let pairs = [(3, 0), (4, 1)];
    let zero = lmsm_path(t, &field(1.5, 2).scaled(0.0), spec, &h, &ts).unwrap();
    for g in recover_coefficients(t, &ts, &zero.values, 0.8, &pairs).unwrap() {
        assert_eq!(g.g, 0.0);
    }
    let p = lmsm_path(t, &field(1.5, 2), spec, &h, &ts).unwrap();
    let a = recover_coefficients(t, &ts, &p.values, 0.8, &pairs).unwrap();
    let doubled: Vec<f64> = p.values.iter().map(|x| 2.0 * x).collect();
    let b = recover_coefficients(t, &ts, &doubled, 0.8, &pairs).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(2.0 * x.g, y.g);
    }
    // Level-0 duals reach far beyond [-1, 1].
    let wide = recover_coefficients(t, &ts, &p.values, 0.8, &[(0, 0)]).unwrap();
    assert!(wide[0].truncated);
}

#[test]
fn recovery_inverts_a_single_term() {
    // Y = 2^{-jH} Psi(2^j t - k) integrates against the dual to exactly 1.
    let t = table();
    let (j, k, h) = (2i64, 1i64, 0.8);
    let n = 1 << 15;
    let ts: Vec<f64> = (0..=n).map(|i| -24.0 + 48.0 * i as f64 / n as f64).collect();
    let ys: Vec<f64> =
        ts.iter().map(|&x| 2f64.powf(-(j as f64) * h) * t.eval(4.0 * x - k as f64, h, 0, 0).unwrap()).collect();
    let g = recover_coefficients(t, &ts, &ys, h, &[(j, k), (j, k + 1), (j + 1, k)]).unwrap();
    assert!((g[0].g - 1.0).abs() < 1e-4, "{:?}", g[0]);
    assert!(g[1].g.abs() < 1e-4 && g[2].g.abs() < 1e-4, "{g:?}");
    assert!(!g[0].truncated);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn holder_is_scale_and_shift_invariant(seed in 0u64..1000, shift in -50.0f64..50.0) {
        let t = unit_grid(1 << 10);
        let mut x = seed as f64 * 0.618;
        let y: Vec<f64> = t.iter().map(|&s| { x = (x * 3.7 + 0.31).fract(); s.sqrt() + 0.01 * x }).collect();
        let base = uniform_holder(&t, &y, (0.0, 1.0)).unwrap();
        let doubled: Vec<f64> = y.iter().map(|v| 8.0 * v).collect();
        prop_assert_eq!(uniform_holder(&t, &doubled, (0.0, 1.0)).unwrap().exponent, base.exponent);
        let scaled: Vec<f64> = y.iter().map(|v| 3.7 * v).collect();
        prop_assert!((uniform_holder(&t, &scaled, (0.0, 1.0)).unwrap().exponent - base.exponent).abs() < 1e-12);
        let moved: Vec<f64> = y.iter().map(|v| v + shift).collect();
        prop_assert!((uniform_holder(&t, &moved, (0.0, 1.0)).unwrap().exponent - base.exponent).abs() < 1e-9);
        let h = HurstFunction::constant(0.8);
        let g0 = modulus_ratio_global(&t[..200], &y[..200], &h, 1.5, (0.0, 1.0), 0.5).unwrap();
        let g1 = modulus_ratio_global(&t[..200], &moved[..200], &h, 1.5, (0.0, 1.0), 0.5).unwrap();
        prop_assert!((g0.ratio_sup - g1.ratio_sup).abs() <= 1e-9 * g0.ratio_sup);
    }

    #[test]
    fn modulus_reports_stay_in_domain(lo in 0.0f64..0.4, width in 0.1f64..0.6, eta in 0.01f64..1.0) {
        let t = unit_grid(128);
        let y: Vec<f64> = t.iter().map(|&s| (13.0 * s).sin()).collect();
        let h = HurstFunction::Smoothstep { t0: 0.0, t1: 1.0, h0: 0.75, h1: 0.95 };
        let r = modulus_ratio_global(&t, &y, &h, 1.5, (lo, lo + width), eta).unwrap();
        prop_assert!(r.ratio_sup >= 0.0);
        prop_assert!(r.argmax.0 >= lo && r.argmax.0 <= lo + width && r.argmax.1 >= lo && r.argmax.1 <= lo + width);
        let l = modulus_ratio_local(&t, &y, &h, 1.5, lo + width / 2.0, (lo, lo + width), eta).unwrap();
        prop_assert!(l.ratio_sup >= 0.0 && l.argmax.0 >= lo && l.argmax.0 <= lo + width);
    }

    #[test]
    fn index_window_respects_its_bounds(j in 1i64..40, t0 in -0.9f64..0.9, tau0 in 0.2f64..3.0) {
        let (d, e) = window_exponents(1.5, f64::INFINITY, tau0).unwrap();
        prop_assert!(d < e);
        let s = 2f64.powi(j as i32);
        for (a, b) in index_window(j, t0, (-1.0, 1.0), d, e) {
            for k in [a, b] {
                let dist = (t0 - k as f64 / s).abs();
                prop_assert!(dist >= (j as f64).powf(-e) && dist <= (j as f64).powf(-d));
            }
        }
    }

    #[test]
    fn grid_norm_is_nonnegative_and_zero_safe(c in -3.0f64..3.0, gamma in 0.0f64..0.9) {
        let u = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let v = [0.7, 0.8];
        let vals: Vec<Vec<f64>> = u.iter().map(|&a| v.iter().map(|&b| c * a * a + b).collect()).collect();
        let n = grid_norm(&u, &v, &vals, gamma).unwrap();
        prop_assert!(n.total >= n.sup && n.u_holder >= 0.0 && n.mixed.abs() < 1e-12);
        prop_assert!((n.v_lipschitz - 1.0).abs() < 1e-9);
    }
}

#[test]
fn inclusion_holds_far_enough_out() {
    let f = field(1.5, 1);
    let r = optimality_probe(&f, 0.5, (0.0, 1.0), 0.5, f64::INFINITY, (20, 30), 256).unwrap();
    assert!(r.levels.iter().all(|l| l.inclusion_holds));
}
