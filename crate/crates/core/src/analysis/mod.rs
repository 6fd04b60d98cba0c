//! Regularity estimators, modulus-of-continuity ratios, coefficient recovery
//! and optimality probes for sampled paths.

mod holder;
mod modulus;
mod norm;
mod probes;
mod recovery;
mod regression;
mod stats;

pub use holder::{
    dyadic_oscillations, local_holder, uniform_holder, HolderEstimate, HolderMode, Stabilization, EXPONENT_CEILING,
    MIN_OCTAVES, MIN_SAMPLES, STABILITY_TOLERANCE,
};
pub use modulus::{modulus_ratio_global, modulus_ratio_local, modulus_ratio_lower, DenominatorKind, ModulusReport};
pub use norm::{e_gamma_grid_norm, grid_norm, GridNorm};
pub use probes::{
    index_window, local_optimality_probe, optimality_probe, probe_translation, spacing_check, spacing_exponent, tau_of,
    window_exponents, LocalProbeLevel, LocalProbeReport, OptimalityProbeReport, ProbeLevel, DEFAULT_PROBE_BUDGET,
};
pub use recovery::{recover_coefficients, RecoveredCoefficient, TAIL_WARNING_FRACTION};
pub use regression::{linear_fit, LinearFit};
pub use stats::{kolmogorov_tail, ks_two_sample, median, relative_change, KsResult};

#[cfg(test)]
mod tests;
