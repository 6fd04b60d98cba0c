//! Command-line laboratory around `lmsm-core`: kernel tables, path and field
//! synthesis, path analysis and the acceptance suite, each run leaving
//! artifacts stamped with the configuration that produced them.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod commands;
pub mod config;
pub mod criteria;
pub mod error;
pub mod provenance;
pub mod report;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, CliResult};
pub use provenance::Provenance;
