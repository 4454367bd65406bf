//! Memory-polynomial amplifier models, iterative digital predistortion and
//! rate-energy analysis of a MIMO link carrying simultaneous information and
//! power transfer.
//!
//! Modules build on one another bottom-up: [`signal`] produces waveforms and
//! spectral statistics, [`hpa`] models and identifies amplifiers, [`dpd`]
//! inverts them, [`mimo`] evaluates the beamformed link and [`swipt`] turns
//! link budgets into rate-energy regions.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dpd;
pub mod error;
pub mod hpa;
mod lstsq;
pub mod mimo;
pub mod seed;
pub mod signal;
pub mod swipt;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
