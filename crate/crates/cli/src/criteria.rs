//! The acceptance suite: thirteen numbered checks, each a fixed experiment
//! with a pass threshold taken from [`Tolerances`](crate::config::Tolerances).

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use lmsm_core::analysis::{
    ks_two_sample, local_holder, median, modulus_ratio_global, modulus_ratio_local, optimality_probe,
    recover_coefficients, relative_change, uniform_holder, DEFAULT_PROBE_BUDGET,
};
use lmsm_core::kernel::{
    dual_moment, fourier_check, gram_matrix, localization_profile, log_spaced, DirectKernel, KernelTable, TableGrid,
};
use lmsm_core::stable::{tail_report, CoefficientField, StableParams};
use lmsm_core::synthesis::{lmsm_path, synthesize_points, HurstFunction, TruncationSpec};
use lmsm_core::wavelet::build_wavelet;
use lmsm_core::{Wavelet, WaveletDD};
use serde::Serialize;
use serde_json::json;

use crate::cache::kernel_table;
use crate::commands::cmd_simulate;
use crate::config::{OutputConfig, RunConfig};
use crate::error::{CliError, CliResult};

pub struct Criterion {
    pub id: u32,
    pub key: &'static str,
    pub statement: &'static str,
    run: fn(&RunConfig, &mut Context) -> CliResult<Verdict>,
}

/// What a criterion measured and whether that met its threshold.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub measured: String,
    pub threshold: String,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub key: &'static str,
    pub pass: bool,
    pub measured: String,
    pub threshold: String,
    pub seconds: f64,
    pub detail: serde_json::Value,
    /// Set when the experiment itself could not run.
    pub error: Option<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let what = match &self.error {
            Some(e) => format!("error: {e}"),
            None => format!("measured {}; need {}", self.measured, self.threshold),
        };
        format!("[{status}] {:>2} {:<22} {what} ({:.1} s)", self.id, self.key, self.seconds)
    }
}

/// Wavelet and kernel tables shared between criteria.
pub struct Context {
    wavelet: Option<Arc<Wavelet>>,
    order: usize,
    tables: HashMap<String, Arc<KernelTable>>,
}

impl Context {
    pub fn new(cfg: &RunConfig) -> Self {
        Self { wavelet: None, order: cfg.wavelet_order, tables: HashMap::new() }
    }

    fn wavelet(&mut self) -> CliResult<Arc<Wavelet>> {
        if self.wavelet.is_none() {
            self.wavelet = Some(Arc::new(build_wavelet(self.order)?));
        }
        Ok(self.wavelet.clone().expect("just set"))
    }

    /// Standard multi-node table for `alpha`.
    fn table(&mut self, alpha: f64) -> CliResult<Arc<KernelTable>> {
        let grid = TableGrid::standard(alpha, self.order);
        let key = serde_json::to_string(&grid).map_err(|e| CliError::Io(e.to_string()))?;
        if let Some(t) = self.tables.get(&key) {
            return Ok(t.clone());
        }
        let w = self.wavelet()?;
        let t = Arc::new(kernel_table(&w, &grid)?);
        self.tables.insert(key, t.clone());
        Ok(t)
    }

    fn field(&mut self, alpha: f64, seed: u64) -> CliResult<CoefficientField> {
        let w = self.wavelet()?;
        Ok(CoefficientField::new(StableParams::new(alpha, 0.0, 1.0)?, seed, &*w)?)
    }
}

fn seeds(cfg: &RunConfig, n: u64) -> Vec<u64> {
    (0..n).map(|i| cfg.seed.wrapping_add(i)).collect()
}

/// `t_i = i 2^-level`, `i = 0..=2^level`.
fn dyadic_grid(level: u32) -> Vec<f64> {
    let n = 1u64 << level;
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

fn within(x: f64, band: (f64, f64)) -> bool {
    x >= band.0 && x <= band.1
}

const SMOOTHSTEP: HurstFunction = HurstFunction::Smoothstep { t0: 0.0, t1: 1.0, h0: 0.75, h1: 0.95 };

fn c1_fourier(cfg: &RunConfig, _: &mut Context) -> CliResult<Verdict> {
    let start = Instant::now();
    let wd: WaveletDD = build_wavelet(cfg.wavelet_order)?;
    let xi = log_spaced(0.5, 8.0, 20);
    let mut worst = 0.0f64;
    let mut per_v = Vec::new();
    for v in [0.70, 0.80, 0.95] {
        let r = fourier_check(&wd, 1.5, v, &xi, 8, 64)?;
        worst = worst.max(r.max_rel_error);
        per_v.push(json!({ "v": v, "max_rel_error": r.max_rel_error, "rel_errors": r.rel_errors }));
    }
    let secs = start.elapsed().as_secs_f64();
    let tol = cfg.tolerances.fourier;
    Ok(Verdict {
        pass: worst < tol && secs < 120.0,
        measured: format!("max rel error {worst:.3e} in {secs:.1} s"),
        threshold: format!("< {tol:e} within 120 s"),
        detail: json!({ "xi": xi, "per_v": per_v, "seconds": secs }),
    })
}

fn c2_gram(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let table = ctx.table(1.5)?;
    let g = gram_matrix(&table, 0.8, (-2, 2), (-4, 4))?;
    let tol = cfg.tolerances.gram;
    Ok(Verdict {
        pass: g.max_abs_error < tol,
        measured: format!("max |G - I| {:.3e} at {:?}", g.max_abs_error, g.worst_entry),
        threshold: format!("< {tol:e}"),
        detail: json!({ "size": g.indices.len(), "max_abs_error": g.max_abs_error, "worst_entry": g.worst_entry }),
    })
}

fn c3_dual_moment(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let table = ctx.table(1.5)?;
    let vs = [0.70, 0.75, 0.80, 0.90, 0.95];
    let moments = vs.iter().map(|&v| dual_moment(&table, v)).collect::<Result<Vec<_>, _>>()?;
    let worst = moments.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = cfg.tolerances.dual_moment;
    Ok(Verdict {
        pass: worst < tol,
        measured: format!("max |moment| {worst:.3e}"),
        threshold: format!("< {tol:e}"),
        detail: json!({ "v": vs, "moments": moments }),
    })
}

fn c4_localization(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let w = ctx.wavelet()?;
    let k = DirectKernel::new(&*w, 1.5)?;
    let grid = |x_max: f64| -> Vec<f64> { (0..=(16.0 * x_max) as usize).map(|i| -x_max + i as f64 / 8.0).collect() };
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for v in [0.7, 0.95] {
        let a = localization_profile(&k, v, 0, 0, &grid(50.0))?;
        let b = localization_profile(&k, v, 0, 0, &grid(100.0))?;
        let change = relative_change(a.sup_value, b.sup_value);
        worst = worst.max(change);
        rows.push(json!({ "v": v, "sup_50": a.sup_value, "sup_100": b.sup_value, "argmax_100": b.argmax_x, "change": change }));
    }
    let tol = cfg.tolerances.localization;
    Ok(Verdict {
        pass: worst < tol,
        measured: format!("max relative change {worst:.3e}"),
        threshold: format!("< {tol}"),
        detail: json!({ "grid_step": 0.125, "per_v": rows }),
    })
}

fn c5_recovery(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let start = Instant::now();
    let table = ctx.table(1.5)?;
    let f = ctx.field(1.5, cfg.seed)?;
    // The dual decays slowly; a wide window at resolution 2^-8 keeps the
    // neglected tail of the pairing small.
    let m = 32.0;
    let ts: Vec<f64> = (0..=(64 << 8)).map(|i| -m + i as f64 / 256.0).collect();
    let h = 0.8;
    let p = lmsm_path(&table, &f, TruncationSpec::new(m, 12)?, &HurstFunction::constant(h), &ts)?;
    let pairs: Vec<(i64, i64)> = (0..=1).flat_map(|j| (-2..=2).map(move |k| (j, k))).collect();
    let got = recover_coefficients(&table, &ts, &p.values, h, &pairs)?;
    let rel: Vec<f64> = got
        .iter()
        .map(|g| {
            let e = f.coefficient(g.j, g.k);
            ((g.g - e) / e).abs()
        })
        .collect();
    let med = median(&rel);
    let secs = start.elapsed().as_secs_f64();
    let tol = cfg.tolerances.recovery;
    Ok(Verdict {
        pass: med < tol && secs < 600.0,
        measured: format!("median relative error {med:.3e} in {secs:.1} s"),
        threshold: format!("< {tol} within 600 s"),
        detail: json!({ "m": m, "resolution": 1.0 / 256.0, "n": 12, "seed": cfg.seed, "coefficients": got,
            "relative_errors": rel, "shell_fraction": p.meta.shell_fraction }),
    })
}

/// Paths of 2^14 + 1 points on [0, 1] at alpha = 1.8, truncated at the
/// sampling resolution.
fn alpha18_paths(
    cfg: &RunConfig,
    ctx: &mut Context,
    hurst: &HurstFunction,
    mut each: impl FnMut(&[f64], &[f64]) -> CliResult<f64>,
) -> CliResult<Vec<f64>> {
    let table = ctx.table(1.8)?;
    let ts = dyadic_grid(14);
    let spec = TruncationSpec::new(1.0, 14)?;
    let mut out = Vec::new();
    for s in seeds(cfg, 50) {
        let f = ctx.field(1.8, s)?;
        let p = lmsm_path(&table, &f, spec, hurst, &ts)?;
        out.push(each(&ts, &p.values)?);
    }
    Ok(out)
}

fn c6_uniform_holder(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let hurst = HurstFunction::constant(0.9);
    let ex = alpha18_paths(cfg, ctx, &hurst, |t, y| Ok(uniform_holder(t, y, (0.0, 1.0))?.exponent))?;
    let med = median(&ex);
    let band = cfg.tolerances.holder_lfsm;
    Ok(Verdict {
        pass: within(med, band),
        measured: format!("median exponent {med:.4} (target {:.4})", 0.9 - 1.0 / 1.8),
        threshold: format!("in [{}, {}]", band.0, band.1),
        detail: json!({ "seeds": seeds(cfg, 50), "exponents": ex }),
    })
}

fn c7_local_holder(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    // Innermost neighbourhood [0.5 - 2^-5, 0.5 + 2^-5] still holds 1025 samples.
    let ex = alpha18_paths(cfg, ctx, &SMOOTHSTEP, |t, y| Ok(local_holder(t, y, 0.5, 5)?.exponent))?;
    let med = median(&ex);
    let band = cfg.tolerances.holder_local;
    Ok(Verdict {
        pass: within(med, band),
        measured: format!("median exponent {med:.4} (target {:.4})", SMOOTHSTEP.eval(0.5) - 1.0 / 1.8),
        threshold: format!("in [{}, {}]", band.0, band.1),
        detail: json!({ "hurst": SMOOTHSTEP, "seeds": seeds(cfg, 50), "exponents": ex }),
    })
}

fn c8_global_modulus(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let table = ctx.table(1.5)?;
    let spec = TruncationSpec::new(1.0, 12)?;
    let (coarse, fine) = (dyadic_grid(10), dyadic_grid(11));
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for s in seeds(cfg, 20) {
        let f = ctx.field(1.5, s)?;
        for (ts, out) in [(&coarse, &mut a), (&fine, &mut b)] {
            let p = lmsm_path(&table, &f, spec, &SMOOTHSTEP, ts)?;
            out.push(modulus_ratio_global(ts, &p.values, &SMOOTHSTEP, 1.5, (0.0, 1.0), 0.5)?.ratio_sup);
        }
    }
    let (ma, mb) = (median(&a), median(&b));
    let change = relative_change(ma, mb);
    let tol = cfg.tolerances.modulus_change;
    Ok(Verdict {
        pass: change < tol,
        measured: format!("median {ma:.4} -> {mb:.4}, change {change:.3e}"),
        threshold: format!("change < {tol}"),
        detail: json!({ "grids": ["2^10 + 1", "2^11 + 1"], "eta": 0.5, "coarse": a, "fine": b }),
    })
}

/// `t0` plus eight points per octave on each side, out to distance `2^-max_octave`.
fn clustered_points(t0: f64, max_octave: u32) -> Vec<f64> {
    let mut pts = vec![t0];
    for i in 2..=max_octave {
        for m in 0..8 {
            let d = 2f64.powi(-(i as i32)) * (1.0 + m as f64 / 8.0);
            pts.extend([t0 - d, t0 + d]);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts
}

fn c9_local_modulus(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let table = ctx.table(1.5)?;
    let (t0, h) = (0.5, HurstFunction::constant(0.8));
    // Refinement level L sees distances down to 2^-(6 * 2^(L-1)): the log
    // factor separating the two moduli grows by a fixed ratio per level.
    let reach: Vec<u32> = vec![6, 12, 24, 48];
    let pts = clustered_points(t0, 48);
    let spec = TruncationSpec::new(1.0, 48)?;
    let mut eta0 = vec![Vec::new(); reach.len()];
    let mut eta5 = vec![Vec::new(); reach.len()];
    for s in seeds(cfg, 50) {
        let f = ctx.field(1.5, s)?;
        let p = lmsm_path(&table, &f, spec, &h, &pts)?;
        for (l, &r) in reach.iter().enumerate() {
            let min_d = 2f64.powi(-(r as i32));
            let (tt, yy): (Vec<f64>, Vec<f64>) =
                pts.iter().zip(&p.values).filter(|(t, _)| **t == t0 || (*t - t0).abs() >= min_d).unzip();
            eta0[l].push(modulus_ratio_local(&tt, &yy, &h, 1.5, t0, (0.0, 1.0), 0.0)?.ratio_sup);
            eta5[l].push(modulus_ratio_local(&tt, &yy, &h, 1.5, t0, (0.0, 1.0), 0.5)?.ratio_sup);
        }
    }
    let m0: Vec<f64> = eta0.iter().map(|v| median(v)).collect();
    let m5: Vec<f64> = eta5.iter().map(|v| median(v)).collect();
    let increasing = m0.windows(2).all(|w| w[1] > w[0]);
    let worst = m5.windows(2).map(|w| relative_change(w[0], w[1])).fold(0.0, f64::max);
    let tol = cfg.tolerances.modulus_change;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    Ok(Verdict {
        pass: increasing && worst < tol,
        measured: format!("eta=0 medians [{}]; eta=0.5 max change {worst:.3e}", fmt(&m0)),
        threshold: format!("eta=0 strictly increasing; eta=0.5 change < {tol}"),
        detail: json!({ "min_distance_log2": reach, "eta0_medians": m0, "eta05_medians": m5,
            "eta0": eta0, "eta05": eta5, "truncation_n": 48 }),
    })
}

fn c10_probe(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let mut mins = Vec::new();
    let mut lower_bound = false;
    for s in seeds(cfg, 10) {
        let f = ctx.field(1.5, s)?;
        let r = optimality_probe(&f, 0.5, (0.0, 1.0), 0.5, f64::INFINITY, (20, 40), DEFAULT_PROBE_BUDGET)?;
        lower_bound |= r.trailing_is_lower_bound;
        mins.push(r.trailing_min);
    }
    let positive = mins.iter().filter(|&&m| m > 0.0).count();
    let need = cfg.tolerances.probe_positive;
    Ok(Verdict {
        pass: positive >= need,
        measured: format!("{positive}/10 seeds with positive trailing minimum"),
        threshold: format!(">= {need}/10"),
        detail: json!({ "trailing_min": mins, "subsampled_lower_bound": lower_bound,
            "note": "empirical trend on levels 20..=40, not a statement about the continuum" }),
    })
}

fn c11_tail(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for alpha in [1.3, 1.5, 1.8] {
        let f = ctx.field(alpha, cfg.seed)?;
        let r = tail_report(&f, 1_000_000, &[1.0, 10.0, 100.0])?;
        worst = worst.max((r.hill_alpha_estimate - alpha).abs());
        rows.push(json!({ "alpha": alpha, "hill": r.hill_alpha_estimate, "fraction": r.hill_fraction }));
    }
    let tol = cfg.tolerances.hill;
    Ok(Verdict {
        pass: worst <= tol,
        measured: format!("max |hill - alpha| {worst:.4}"),
        threshold: format!("<= {tol}"),
        detail: json!({ "draws": 1_000_000, "per_alpha": rows }),
    })
}

fn c12_self_similarity(cfg: &RunConfig, ctx: &mut Context) -> CliResult<Verdict> {
    let table = ctx.table(1.5)?;
    let h = 0.8;
    let spec = TruncationSpec::new(1.0, 12)?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for s in seeds(cfg, 500) {
        let f = ctx.field(1.5, s)?;
        let y = synthesize_points(&table, &f, spec, 0, &[(0.5, h), (1.0, h)])?;
        a.push(y[0] / 0.5f64.powf(h));
        b.push(y[1]);
    }
    let ks = ks_two_sample(&a, &b)?;
    let level = cfg.tolerances.ks_level;
    Ok(Verdict {
        pass: ks.p_value > level,
        measured: format!("KS D = {:.4}, p = {:.4}", ks.statistic, ks.p_value),
        threshold: format!("p > {level}"),
        detail: json!({ "ks": ks, "seeds": 500 }),
    })
}

fn c13_determinism(cfg: &RunConfig, _: &mut Context) -> CliResult<Verdict> {
    let run_cfg = RunConfig {
        seed: cfg.seed,
        wavelet_order: cfg.wavelet_order,
        output: OutputConfig { dir: cfg.output.dir.join("determinism") },
        ..RunConfig::default()
    };
    let read = |c: &RunConfig| -> CliResult<Vec<u8>> {
        let out = cmd_simulate(c)?;
        let path = &out.files[0];
        std::fs::read(path).map_err(|e| CliError::io(path, e))
    };
    let first = read(&run_cfg)?;
    let second = read(&run_cfg)?;
    let same = first == second;
    Ok(Verdict {
        pass: same,
        measured: format!(
            "{} vs {} bytes, {}",
            first.len(),
            second.len(),
            if same { "identical" } else { "different" }
        ),
        threshold: "byte-identical CSV".into(),
        detail: json!({ "dir": run_cfg.output.dir }),
    })
}

pub fn registry() -> &'static [Criterion] {
    static ALL: [Criterion; 13] = [
        Criterion { id: 1, key: "kernel-fourier", statement: "Fourier identity of the kernel at alpha=1.5, v in {0.70, 0.80, 0.95}: max relative error on 20 log-spaced frequencies in [0.5, 8] below tolerance, in under 2 minutes", run: c1_fourier },
        Criterion { id: 2, key: "biorthogonality", statement: "Gram matrix of kernel and dual translates over |j| <= 2, |k| <= 4 at v=0.8 equals the identity entrywise within tolerance", run: c2_gram },
        Criterion { id: 3, key: "dual-zero-moment", statement: "Integral of the dual kernel vanishes within tolerance at five v values", run: c3_dual_moment },
        Criterion { id: 4, key: "localization", statement: "Grid sup of (3+|x|)^2 |Psi(x,v)| changes by less than the tolerance when the x range doubles from 50 to 100, v in {0.7, 0.95}", run: c4_localization },
        Criterion { id: 5, key: "coefficient-recovery", statement: "Constant H*=0.8, alpha=1.5, n=12: median relative error of recovered coefficients over j in {0,1}, k in -2..2 below tolerance, in under 10 minutes", run: c5_recovery },
        Criterion { id: 6, key: "holder-uniform-lfsm", statement: "LFSM alpha=1.8, H=0.9, 50 seeds, 2^14 points on [0,1]: ensemble median uniform Holder exponent inside the band around H - 1/alpha", run: c6_uniform_holder },
        Criterion { id: 7, key: "holder-local-lmsm", statement: "Smoothstep H with H(0.5)=0.85, alpha=1.8, 50 seeds: ensemble median local Holder exponent at t0=0.5 inside the band around H(t0) - 1/alpha", run: c7_local_holder },
        Criterion { id: 8, key: "global-modulus", statement: "Global modulus ratio with eta=0.5: ensemble median (20 seeds) changes by less than the tolerance under one grid doubling", run: c8_global_modulus },
        Criterion { id: 9, key: "local-modulus-trend", statement: "Constant H: local modulus ratio median increases strictly over 4 refinement levels at eta=0 and stays within the tolerance between levels at eta=0.5", run: c9_local_modulus },
        Criterion { id: 10, key: "optimality-probe", statement: "alpha=1.5, constant H, tau0=0.5: trailing minimum over j in [20, 40] of j^tau0 2^(-j/alpha) max |eps| over D_j is positive in enough of 10 seeds", run: c10_probe },
        Criterion { id: 11, key: "tail-index", statement: "Hill estimate from 10^6 coefficient draws within tolerance of alpha for alpha in {1.3, 1.5, 1.8}", run: c11_tail },
        Criterion { id: 12, key: "self-similarity", statement: "Constant H=0.8, alpha=1.5, 500 seeds: two-sample KS test between Y(0.5)/0.5^H and Y(1) is not rejected at the configured level", run: c12_self_similarity },
        Criterion { id: 13, key: "determinism", statement: "simulate run twice with an identical config writes byte-identical CSV", run: c13_determinism },
    ];
    &ALL
}

/// Runs one criterion; errors inside the experiment count as a failure.
pub fn run(c: &Criterion, cfg: &RunConfig, ctx: &mut Context) -> CriterionResult {
    let start = Instant::now();
    let outcome = (c.run)(cfg, ctx);
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(v) => CriterionResult {
            id: c.id,
            key: c.key,
            pass: v.pass,
            measured: v.measured,
            threshold: v.threshold,
            seconds,
            detail: v.detail,
            error: None,
        },
        Err(e) => CriterionResult {
            id: c.id,
            key: c.key,
            pass: false,
            measured: String::new(),
            threshold: String::new(),
            seconds,
            detail: serde_json::Value::Null,
            error: Some(e.to_string()),
        },
    }
}
