use std::path::PathBuf;

use lmsm_core::synthesis::HurstFunction;
use lmsm_lab::config::{Estimator, Overrides, SampleKind};
use lmsm_lab::{CliError, RunConfig};
use proptest::prelude::*;

#[test]
fn empty_file_gives_valid_defaults() {
    let cfg = RunConfig::from_toml("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    cfg.validate().unwrap();
    assert_eq!(cfg.alpha, 1.5);
    assert_eq!(cfg.wavelet_order, 20);
    assert_eq!(cfg.grid.points, 1025);
}

#[test]
fn flags_override_file_values() {
    let mut cfg = RunConfig::from_toml("seed = 3\nalpha = 1.2\n[truncation]\nn = 9\n").unwrap();
    cfg.apply(&Overrides {
        seed: Some(11),
        alpha: Some(1.7),
        order: Some(24),
        levels: Some(5),
        out: Some("o".into()),
        workers: Some(2),
    });
    assert_eq!((cfg.seed, cfg.alpha, cfg.wavelet_order, cfg.truncation.n, cfg.workers), (11, 1.7, 24, 5, 2));
    assert_eq!(cfg.output.dir, PathBuf::from("o"));
    cfg.validate().unwrap();
}

#[test]
fn validation_rejects_out_of_range_settings() {
    for text in [
        "alpha = 2.0",
        "alpha = 0.9",
        "beta = 1.5",
        "wavelet_order = 3",
        "[grid]\nt_max = 3.0",
        "[grid]\npoints = 1",
        "[tolerances]\nfourier = 0.0",
        "[hurst]\nkind = \"constant\"\nh = 0.5",
        "[hurst]\nkind = \"constant\"\nh = 0.995",
        "[grid]\nkind = \"field\"\nv_grid = [0.6]",
    ] {
        let cfg = RunConfig::from_toml(text).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Validation(_))), "{text}");
    }
    assert!(matches!(RunConfig::from_toml("colour = 1"), Err(CliError::Validation(_))));
}

#[test]
fn hash_ignores_output_location_and_threads() {
    let a = RunConfig::default();
    let b = RunConfig { workers: 3, output: lmsm_lab::config::OutputConfig { dir: "elsewhere".into() }, ..a.clone() };
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
    let c = RunConfig { seed: 2, ..a.clone() };
    assert_ne!(a.hash(), c.hash());
}

fn estimators() -> impl Strategy<Value = Vec<Estimator>> {
    proptest::sample::subsequence(
        vec![
            Estimator::UniformHolder,
            Estimator::LocalHolder,
            Estimator::ModulusGlobal,
            Estimator::ModulusLocal,
            Estimator::Recovery,
            Estimator::OptimalityProbe,
            Estimator::LocalProbe,
            Estimator::Tail,
        ],
        0..=8,
    )
}

prop_compose! {
    fn configs()(
        alpha in 1.01f64..1.99,
        beta in -1.0f64..1.0,
        order in 15usize..=40,
        seed in any::<u64>(),
        n in 1u32..30,
        m in 1.0f64..64.0,
        h in 0.0f64..1.0,
        field in any::<bool>(),
        points in 2usize..5000,
        eta in 0.0f64..2.0,
        est in estimators(),
        ensemble in 0u64..100,
    ) -> RunConfig {
        let mut c = RunConfig { alpha, beta, wavelet_order: order, seed, ..RunConfig::default() };
        c.truncation.n = n;
        c.truncation.m = m;
        c.hurst = HurstFunction::constant(1.0 / alpha + (0.25 + 0.5 * h) * (1.0 - 1.0 / alpha));
        c.grid.kind = if field { SampleKind::Field } else { SampleKind::Path };
        c.grid.v_grid = vec![c.hurst.eval(0.0)];
        c.grid.points = points;
        c.analysis.eta = eta;
        c.analysis.estimators = est;
        c.analysis.ensemble = ensemble;
        c
    }
}

proptest! {
    #[test]
    fn toml_round_trip_is_lossless(cfg in configs()) {
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn generated_configs_validate(cfg in configs()) {
        prop_assert!(cfg.validate().is_ok(), "{:?}", cfg.validate());
    }
}
