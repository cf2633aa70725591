//! Numerical laboratory for adaptive waveform inversion (AWI) and matched-source
//! waveform inversion (MSWI) on synthetic acoustic transmission data.
//!
//! The crate builds scaled wavelet families, first-arrival travel times,
//! leading-term and multi-arrival gathers, Tikhonov-regularized matching
//! filters, and the objective functionals built from them, plus harnesses that
//! measure how those objectives relate to travel-time misfit as the wavelength
//! shrinks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod filter;
pub mod forward;
pub mod io;
pub mod medium;
pub mod objectives;
pub mod signal;

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{AwiError, Result};
