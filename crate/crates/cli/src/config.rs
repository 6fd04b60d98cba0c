//! Run configuration: one TOML file, every field defaulted, flags on top.

use std::path::{Path, PathBuf};

use lmsm_core::kernel::{check_alpha, TableGrid};
use lmsm_core::synthesis::{HurstFunction, TruncationSpec};
use lmsm_core::wavelet::{MAX_ORDER, MIN_ORDER};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    /// Constant skewness of the stable measure.
    pub beta: f64,
    /// Daubechies order N (N vanishing moments, support length 2N - 1).
    pub wavelet_order: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick one per core.
    pub workers: usize,
    pub truncation: TruncationSpec,
    pub hurst: HurstFunction,
    pub grid: GridConfig,
    pub kernel: KernelConfig,
    pub analysis: AnalysisConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            beta: 0.0,
            wavelet_order: 20,
            seed: 1,
            workers: 0,
            truncation: TruncationSpec::default(),
            hurst: HurstFunction::constant(0.8),
            grid: GridConfig::default(),
            kernel: KernelConfig::default(),
            analysis: AnalysisConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    /// `Y(t) = X(t, H(t))` on the t grid.
    Path,
    /// `∂_v^q X(u, v)` on the product of the t grid and `v_grid`.
    Field,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub kind: SampleKind,
    pub t_min: f64,
    pub t_max: f64,
    /// Number of equispaced points, ends included.
    pub points: usize,
    pub v_grid: Vec<f64>,
    /// v-derivative order for field output.
    pub q: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { kind: SampleKind::Path, t_min: 0.0, t_max: 1.0, points: 1025, v_grid: vec![0.7, 0.8, 0.9], q: 0 }
    }
}

impl GridConfig {
    pub fn t_grid(&self) -> Vec<f64> {
        equispaced(self.t_min, self.t_max, self.points)
    }
}

/// `n` points from `lo` to `hi`, ends exact.
pub fn equispaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// Chebyshev v nodes; 1 builds a single-node table at `v_min`.
    pub nv: usize,
    /// v range; `None` picks the standard range inside `(1/alpha, 1)`.
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub x_max: i64,
    pub x_step_log2: u32,
    pub sample_level: u32,
    pub q_max: usize,
    pub fourier_v: Vec<f64>,
    pub fourier_xi: (f64, f64),
    pub fourier_points: usize,
    /// Spacing `2^-level` of the kernel samples behind the Fourier check.
    pub fourier_level: u32,
    pub gram_v: f64,
    pub gram_levels: i32,
    pub gram_shifts: i64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        let g = TableGrid::standard(1.5, 20);
        Self {
            nv: g.nv,
            v_min: None,
            v_max: None,
            x_max: g.x_max,
            x_step_log2: g.x_step_log2,
            sample_level: g.sample_level,
            q_max: g.q_max,
            fourier_v: vec![0.7, 0.8, 0.95],
            fourier_xi: (0.5, 8.0),
            fourier_points: 20,
            fourier_level: 8,
            gram_v: 0.8,
            gram_levels: 2,
            gram_shifts: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    UniformHolder,
    LocalHolder,
    ModulusGlobal,
    ModulusLocal,
    Recovery,
    OptimalityProbe,
    LocalProbe,
    Tail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub estimators: Vec<Estimator>,
    pub interval: (f64, f64),
    pub t0: f64,
    pub shrink_levels: u32,
    pub eta: f64,
    /// Half-width of the window around `t0` for the local modulus.
    pub local_window: f64,
    /// Seeds `seed, seed + 1, ...` simulated and analysed when no input
    /// file is given; 0 disables ensemble mode.
    pub ensemble: u64,
    pub recovery_levels: (i64, i64),
    pub recovery_shifts: (i64, i64),
    pub probe_tau0: f64,
    pub probe_levels: (i64, i64),
    pub probe_budget: u64,
    pub local_probe_levels: u32,
    pub tail_draws: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            estimators: vec![
                Estimator::UniformHolder,
                Estimator::LocalHolder,
                Estimator::ModulusGlobal,
                Estimator::ModulusLocal,
            ],
            interval: (0.0, 1.0),
            t0: 0.5,
            shrink_levels: 3,
            eta: 0.5,
            local_window: 0.5,
            ensemble: 0,
            recovery_levels: (0, 1),
            recovery_shifts: (-2, 2),
            probe_tau0: 0.5,
            probe_levels: (20, 40),
            probe_budget: lmsm_core::analysis::DEFAULT_PROBE_BUDGET,
            local_probe_levels: 8,
            tail_draws: 1_000_000,
        }
    }
}

/// Pass thresholds used by the kernel report and the verify suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub fourier: f64,
    pub gram: f64,
    pub dual_moment: f64,
    pub localization: f64,
    pub recovery: f64,
    pub holder_lfsm: (f64, f64),
    pub holder_local: (f64, f64),
    pub modulus_change: f64,
    pub probe_positive: usize,
    pub hill: f64,
    pub ks_level: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fourier: 1e-3,
            gram: 1e-3,
            dual_moment: 1e-6,
            localization: 0.01,
            recovery: 0.05,
            holder_lfsm: (0.264, 0.424),
            holder_local: (0.214, 0.374),
            modulus_change: 0.2,
            probe_positive: 8,
            hill: 0.1,
            ks_level: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("lmsm-out") }
    }
}

/// Flag values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub order: Option<usize>,
    pub levels: Option<u32>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("every config field serializes")
    }

    /// Reads `path` if given, else the defaults, then applies `ov`.
    pub fn load(path: Option<&Path>, ov: &Overrides) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        cfg.apply(ov);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(s) = ov.seed {
            self.seed = s;
        }
        if let Some(a) = ov.alpha {
            self.alpha = a;
        }
        if let Some(o) = ov.order {
            self.wavelet_order = o;
        }
        if let Some(n) = ov.levels {
            self.truncation.n = n;
        }
        if let Some(d) = &ov.out {
            self.output.dir = d.clone();
        }
        if let Some(w) = ov.workers {
            self.workers = w;
        }
    }

    /// Cheap checks that run before any computation.
    pub fn validate(&self) -> CliResult<()> {
        check_alpha(self.alpha)?;
        if !(self.beta.abs() <= 1.0) {
            return Err(CliError::Validation(format!("beta = {} must lie in [-1, 1]", self.beta)));
        }
        if !(MIN_ORDER..=MAX_ORDER).contains(&self.wavelet_order) {
            return Err(CliError::Validation(format!(
                "wavelet order {} outside {MIN_ORDER}..={MAX_ORDER}",
                self.wavelet_order
            )));
        }
        self.truncation.validate()?;
        self.hurst.validate(self.alpha)?;
        let tg = self.table_grid();
        tg.validate()?;
        let (h_lo, h_hi) = self.hurst.range();
        let needed: Vec<f64> = match self.grid.kind {
            SampleKind::Path => vec![h_lo, h_hi],
            SampleKind::Field => self.grid.v_grid.clone(),
        };
        if let Some(v) = needed.iter().find(|&&v| !tg.covers(v)) {
            return Err(CliError::Validation(format!(
                "v = {v} lies outside the kernel table range [{}, {}]",
                tg.a, tg.b
            )));
        }
        let g = &self.grid;
        if !(g.t_min < g.t_max) || g.points < 2 {
            return Err(CliError::Validation("grid needs t_min < t_max and at least 2 points".into()));
        }
        if g.t_min.abs().max(g.t_max.abs()) > self.truncation.m {
            return Err(CliError::Validation(format!(
                "grid [{}, {}] leaves [-M, M] with M = {}",
                g.t_min, g.t_max, self.truncation.m
            )));
        }
        let t = &self.tolerances;
        if [t.fourier, t.gram, t.dual_moment, t.localization, t.recovery, t.modulus_change, t.hill, t.ks_level]
            .iter()
            .any(|x| !(*x > 0.0))
        {
            return Err(CliError::Validation("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Kernel table layout implied by `alpha`, `wavelet_order` and `[kernel]`.
    pub fn table_grid(&self) -> TableGrid {
        let k = &self.kernel;
        let base = TableGrid::standard(self.alpha, self.wavelet_order);
        let a = k.v_min.unwrap_or(base.a);
        let b = if k.nv == 1 { a } else { k.v_max.unwrap_or(base.b) };
        TableGrid {
            a,
            b,
            nv: k.nv,
            x_max: k.x_max,
            x_step_log2: k.x_step_log2,
            sample_level: k.sample_level,
            q_max: k.q_max,
            ..base
        }
    }

    /// The config with settings that cannot change any computed value
    /// (output location, thread count) reset to their defaults.
    pub fn normalized(&self) -> Self {
        Self { workers: 0, output: OutputConfig::default(), ..self.clone() }
    }

    /// SHA-256 of the canonical TOML form of [`RunConfig::normalized`].
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.normalized().to_toml().as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
