//! The fractional antiderivative kernel `Psi(x, v)` of the mother wavelet,
//! its partial derivatives, the dual kernel, and the identities they satisfy.
//!
//! `Psi(x, v) = ∫ (x-s)_+^(v-1/alpha) psi(s) ds`, a Riemann-Liouville integral of
//! order `v + 1 - 1/alpha` up to the factor `Gamma(v + 1 - 1/alpha)`. The dual
//! kernel is the matching right-sided fractional derivative.

mod checks;
mod direct;
mod table;
mod weights;

pub use checks::{
    biorthogonality_check, dual_moment, fourier_check, fourier_target, gram_matrix, localization_profile, log_spaced,
    FourierReport, GramReport, LocalizationReport,
};
pub use direct::DirectKernel;
pub use table::{
    build_kernel_table, dual_slice, kernel_slices, KernelRow, KernelTable, TableGrid, TableHeader, VStencil,
    TABLE_MAGIC,
};
pub use weights::{cell_weights, left_transform};

use crate::error::{LabError, Result};
use crate::special::gamma;

/// Highest `v`-derivative order tabulated by default.
pub const DEFAULT_Q_MAX: usize = 3;
/// Highest `x`-derivative order supported.
pub const MAX_P: usize = 3;

/// Checks `1/alpha < v < 1`.
pub fn check_v(v: f64, alpha: f64) -> Result<()> {
    let lo = 1.0 / alpha;
    if !(v > lo && v < 1.0) {
        return Err(LabError::HurstRange { h: v, lo, hi: 1.0 });
    }
    Ok(())
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(LabError::invalid(format!("alpha = {alpha} must lie in (1, 2)")));
    }
    Ok(())
}

/// Order `v + 1 - 1/alpha` of the fractional integral defining `Psi`.
pub fn integration_order(v: f64, alpha: f64) -> f64 {
    v + 1.0 - 1.0 / alpha
}

/// `1 / (Gamma(v + 1 - 1/alpha) Gamma(1/alpha - v + 1))`, the prefactor of the dual kernel.
pub fn dual_prefactor(v: f64, alpha: f64) -> f64 {
    1.0 / (gamma(v + 1.0 - 1.0 / alpha) * gamma(1.0 / alpha - v + 1.0))
}
