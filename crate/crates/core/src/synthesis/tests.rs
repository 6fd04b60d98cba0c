use super::*;
use crate::kernel::{build_kernel_table, DirectKernel, KernelTable, TableGrid};
use crate::stable::{CoefficientField, StableParams};
use crate::wavelet::build_wavelet;
use crate::Wavelet;
use std::sync::OnceLock;

const ALPHA: f64 = 1.5;

fn wavelet() -> &'static Wavelet {
    static W: OnceLock<Wavelet> = OnceLock::new();
    W.get_or_init(|| build_wavelet::<f64>(20).unwrap())
}

fn table() -> &'static KernelTable {
    static T: OnceLock<KernelTable> = OnceLock::new();
    T.get_or_init(|| build_kernel_table(wavelet(), &TableGrid::standard(ALPHA, 20)).unwrap())
}

fn field(seed: u64) -> CoefficientField {
    CoefficientField::new(StableParams::new(ALPHA, 0.0, 1.0).unwrap(), seed, wavelet()).unwrap()
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn index_set_cardinality() {
    let s = TruncationSpec::new(1.0, 0).unwrap();
    assert_eq!(s.cardinality(), 5);
    let s = TruncationSpec::new(2.0, 12).unwrap();
    assert_eq!(s.k_max(), 16384);
    assert_eq!(s.cardinality(), 25 * 32769);
    assert!(s.contains(-12, 16384) && !s.contains(13, 0) && !s.contains(0, 16385));
    assert!(TruncationSpec::new(0.0, 3).is_err());
}

#[test]
fn hurst_functions_stay_in_range() {
    let kinds = [
        HurstFunction::constant(0.8),
        HurstFunction::LinearClamped { t0: 0.0, h0: 0.7, slope: 0.5, lo: 0.7, hi: 0.9 },
        HurstFunction::Smoothstep { t0: 0.0, t1: 1.0, h0: 0.75, h1: 0.95 },
        HurstFunction::Tabulated { t: vec![0.0, 0.5, 1.0], h: vec![0.7, 0.9, 0.8] },
    ];
    for h in &kinds {
        h.validate(ALPHA).unwrap();
        let (lo, hi) = h.range();
        for i in 0..=200 {
            let v = h.eval(-1.0 + 0.015 * i as f64);
            assert!(v >= lo - 1e-15 && v <= hi + 1e-15, "{} {v}", h.name());
        }
        let text = serde_json::to_string(h).unwrap();
        assert_eq!(&serde_json::from_str::<HurstFunction>(&text).unwrap(), h);
    }
    let smooth = &kinds[2];
    assert!((smooth.eval(0.5) - 0.85).abs() < 1e-15);
    assert_eq!(smooth.rho(), 2.0);
    assert!(kinds[0].rho().is_infinite());
    assert!(HurstFunction::constant(0.6).validate(ALPHA).is_err());
    assert!(HurstFunction::Tabulated { t: vec![1.0, 0.0], h: vec![0.8, 0.8] }.validate(ALPHA).is_err());
}

#[test]
fn w_coefficient_examples() {
    let t = table();
    for (j, k) in [(0, 0), (3, -2), (-2, 5)] {
        assert_eq!(w_coefficient(t, j, k, 0.0, 0.8).unwrap(), 0.0);
    }
    assert_eq!(w_coefficient(t, 0, 100, 0.5, 0.8).unwrap(), 0.0);
    let d = DirectKernel::new(wavelet(), ALPHA).unwrap();
    let want = d.kernel_psi(1.0, 0.8, 0, 0).unwrap() - d.kernel_psi(0.0, 0.8, 0, 0).unwrap();
    let got = w_coefficient(t, 0, 0, 1.0, 0.8).unwrap();
    assert!((got - want).abs() < 1e-6, "{got} {want}");
}

#[test]
fn five_term_sum_matches_direct_expansion() {
    let t = table();
    let f = field(3);
    let spec = TruncationSpec::new(1.0, 0).unwrap();
    let us = [-0.7, 0.25, 1.0];
    let s = synthesize_field(t, &f, spec, 0, &us, &[0.8]).unwrap();
    for (i, &u) in us.iter().enumerate() {
        let direct: f64 = (-2..=2).map(|k| f.coefficient(0, k) * w_coefficient(t, 0, k, u, 0.8).unwrap()).sum();
        assert!((s.values[i][0] - direct).abs() < 1e-12 * direct.abs().max(1.0), "{} {direct}", s.values[i][0]);
    }
}

#[test]
fn field_vanishes_at_origin_for_every_order() {
    let t = table();
    let f = field(11);
    let spec = TruncationSpec::new(2.0, 8).unwrap();
    for q in 0..=3 {
        let s = synthesize_field(t, &f, spec, q, &[0.0, 0.5], &[0.7, 0.85, 0.95]).unwrap();
        assert!(s.values[0].iter().all(|&x| x == 0.0), "q={q} {:?}", s.values[0]);
        assert!(s.values[1].iter().all(|x| x.is_finite()));
    }
}

#[test]
fn v_derivative_matches_finite_difference() {
    let t = table();
    let f = field(5);
    let spec = TruncationSpec::new(2.0, 6).unwrap();
    let us = grid(9, -1.5, 1.5);
    let h = 1e-4;
    for &v in &[0.75, 0.85] {
        let lo = synthesize_field(t, &f, spec, 0, &us, &[v - h]).unwrap().column(0);
        let hi = synthesize_field(t, &f, spec, 0, &us, &[v + h]).unwrap().column(0);
        let d = synthesize_field(t, &f, spec, 1, &us, &[v]).unwrap().column(0);
        let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..us.len() {
            let fd = (hi[i] - lo[i]) / (2.0 * h);
            assert!((fd - d[i]).abs() < 1e-3 * scale, "u={} fd={fd} d={}", us[i], d[i]);
        }
    }
}

#[test]
fn doubling_coefficients_doubles_the_field() {
    let t = table();
    let spec = TruncationSpec::new(2.0, 6).unwrap();
    let us = grid(17, -2.0, 2.0);
    let a = synthesize_field(t, &field(8), spec, 1, &us, &[0.8]).unwrap();
    let b = synthesize_field(t, &field(8).scaled(2.0), spec, 1, &us, &[0.8]).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert_eq!(2.0 * x[0], y[0]);
    }
}

#[test]
fn summation_order_changes_only_roundoff() {
    let t = table();
    let f = field(21);
    let spec = TruncationSpec::new(2.0, 8).unwrap();
    let pts: Vec<(f64, f64)> = grid(11, -1.9, 1.9).into_iter().map(|u| (u, 0.82)).collect();
    let base = Synthesizer::new(t, &f, spec).unwrap().evaluate(&pts, 0).unwrap().0;
    for seed in [1, 2] {
        let shuf = Synthesizer::new(t, &f, spec).unwrap().with_order(SummationOrder::Shuffled(seed));
        let other = shuf.evaluate(&pts, 0).unwrap().0;
        for (a, b) in base.iter().zip(&other) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "{a} {b}");
        }
    }
}

#[test]
fn constant_hurst_path_equals_field_row() {
    let t = table();
    let f = field(2);
    let spec = TruncationSpec::new(1.0, 7).unwrap();
    let ts = grid(65, 0.0, 1.0);
    let p = lmsm_path(t, &f, spec, &HurstFunction::constant(0.8), &ts).unwrap();
    let s = synthesize_field(t, &f, spec, 0, &ts, &[0.8]).unwrap();
    assert_eq!(p.values, s.column(0));
    assert_eq!(p.values[0], 0.0);
    assert!(p.to_csv(&[]).starts_with("t,Y,H\n"));
}

#[test]
fn multifractional_path_is_deterministic() {
    let t = table();
    let spec = TruncationSpec::new(1.0, 8).unwrap();
    let h = HurstFunction::Smoothstep { t0: 0.0, t1: 1.0, h0: 0.75, h1: 0.95 };
    let ts = grid(257, 0.0, 1.0);
    let a = lmsm_path(t, &field(4), spec, &h, &ts).unwrap();
    let b = lmsm_path(t, &field(4), spec, &h, &ts).unwrap();
    assert_eq!(a.to_csv(&["seed: 4".into()]), b.to_csv(&["seed: 4".into()]));
    assert_eq!(a.values[0], 0.0);
    let (tt, yy) = PathSample::parse_csv(&a.to_csv(&["x".into()])).unwrap();
    assert_eq!(tt, ts);
    assert_eq!(yy, a.values);
}

#[test]
fn rejects_invalid_queries() {
    let t = table();
    let f = field(1);
    let spec = TruncationSpec::new(1.0, 4).unwrap();
    assert!(synthesize_field(t, &f, spec, 0, &[1.5], &[0.8]).is_err());
    assert!(synthesize_field(t, &f, spec, 4, &[0.5], &[0.8]).is_err());
    assert!(lmsm_path(t, &f, spec, &HurstFunction::constant(0.995), &[0.5]).is_err());
    let other = CoefficientField::new(StableParams::new(1.7, 0.0, 1.0).unwrap(), 1, wavelet()).unwrap();
    assert!(synthesize_field(t, &other, spec, 0, &[0.5], &[0.8]).is_err());
}

#[test]
fn convergence_profile_is_finite_for_value_and_derivative() {
    let t = table();
    let f = field(9);
    let probes = [(0.3, 0.8), (-0.6, 0.9), (0.9, 0.72)];
    for q in 0..=1 {
        let d = convergence_profile(t, &f, 1.0, 6, q, &probes).unwrap();
        assert_eq!(d.len(), 6);
        assert!(d.iter().all(|x| x.is_finite() && *x >= 0.0), "{d:?}");
    }
}

#[test]
fn metadata_records_truncation() {
    let t = table();
    let f = field(12);
    let spec = TruncationSpec::new(1.0, 5).unwrap();
    let s = synthesize_field(t, &f, spec, 0, &grid(33, -1.0, 1.0), &[0.8]).unwrap();
    assert_eq!(s.meta.truncation, spec);
    assert_eq!(s.meta.seed, 12);
    assert!(s.meta.shell_fraction > 0.0);
    assert_eq!(s.meta.truncation_warning, s.meta.shell_fraction > s.meta.shell_threshold);
    let csv = s.to_csv(&["config_hash: abc".into()]);
    assert!(csv.starts_with("# config_hash: abc\nu,v,X\n"));
    assert_eq!(csv.lines().count(), 2 + 33);
}

#[test]
fn sparse_and_dense_coefficient_fetch_agree() {
    let t = table();
    let f = field(6);
    let spec = TruncationSpec::new(1.0, 21).unwrap();
    // Spread points push the finest levels past the dense-block limit.
    let s = Synthesizer::new(t, &f, spec).unwrap();
    let spread = s.evaluate(&[(0.5, 0.8), (-0.9, 0.8), (0.9, 0.8)], 0).unwrap().0;
    let alone = s.evaluate(&[(0.5, 0.8)], 0).unwrap().0;
    assert_eq!(spread[0], alone[0]);
}

#[test]
fn coarse_levels_keep_small_increments_accurate() {
    // Levels near j = -48 carry a 2^{38} prefactor; a rounding slip in
    // 2^j u - k would swamp an increment at distance 2^-24.
    let d = 2f64.powi(-24);
    let f = field(19);
    let pts = [(0.5, 0.8), (0.5 + d, 0.8)];
    let inc = |n: u32| {
        let y = synthesize_points(table(), &f, TruncationSpec::new(1.0, n).unwrap(), 0, &pts).unwrap();
        y[1] - y[0]
    };
    let (a, b) = (inc(40), inc(48));
    assert!((a - b).abs() < 1e-3 * d.powf(0.8), "{a:e} vs {b:e}");
}
