#![no_std]
//! Precision of Ramsey frequency estimation for qubit probes under
//! spatiotemporally correlated Gaussian dephasing.
//!
//! All quantities are dimensionless: frequencies in units of the bath cutoff
//! `omega_c`, times in units of `1/omega_c`.

extern crate alloc;

pub mod coefficients;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod noise;
pub mod numerics;
pub mod randomized;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
