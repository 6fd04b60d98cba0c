//! The four subcommands. Each returns the artifacts it wrote and any
//! tolerance failures; the binary turns failures into exit code 2.

mod analyze;
mod kernel;
mod simulate;
mod verify;

use std::path::PathBuf;

pub use analyze::{analyze_path, cmd_analyze, EstimatorRow};
pub use kernel::{cmd_kernel, KernelSummary};
pub use simulate::{cmd_simulate, simulate_path};
pub use verify::{cmd_verify, list_criteria};

use lmsm_core::stable::{CoefficientField, StableParams};
use lmsm_core::wavelet::build_wavelet;
use lmsm_core::Wavelet;

use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// One line per tolerance that was missed.
    pub failures: Vec<String>,
    /// Human-readable summary for stdout.
    pub summary: String,
}

pub(crate) fn wavelet(cfg: &RunConfig) -> CliResult<Wavelet> {
    Ok(build_wavelet::<f64>(cfg.wavelet_order)?)
}

pub(crate) fn field(cfg: &RunConfig, w: &Wavelet, seed: u64) -> CliResult<CoefficientField> {
    Ok(CoefficientField::new(StableParams::new(cfg.alpha, cfg.beta, 1.0)?, seed, w)?)
}
