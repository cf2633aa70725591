//! Tikhonov-regularized matching filters between predicted and observed traces.

mod cg;
mod kernel;
mod matching;
mod operator;

pub(crate) use cg::pcg;
pub use kernel::{g_kernel, g_kernel_on};
pub(crate) use matching::{diagnostics_on, solve_on};
pub use matching::{
    filter_diagnostics, solve_filter, solve_filter_with, FilterDiagnostics, FilterOptions,
    MatchingFilter,
};
pub use operator::{fft_size, TraceOperator};
