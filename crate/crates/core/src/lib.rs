//! Numerical core for simulating linear multifractional stable motion by
//! wavelet series and for checking the regularity of the simulated paths.
//!
//! Everything numerical is generic over [`Real`]; the aliases below fix the
//! scalar for the common cases.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod analysis;
pub mod error;
pub mod kernel;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod stable;
pub mod synthesis;
pub mod wavelet;

pub use error::{LabError, Result};
pub use scalar::{DoubleDouble, Real};

pub type Wavelet = wavelet::WaveletSpec<f64>;
pub type WaveletDD = wavelet::WaveletSpec<DoubleDouble>;

/// Version of this crate, recorded in output provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
