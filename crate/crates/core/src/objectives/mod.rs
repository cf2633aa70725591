//! Objective functionals built on matching filters, and the travel-time
//! misfits they approach as the wavelength shrinks.
//!
//! Constants follow the usual conventions: J_FWI = ½Σ‖p − d‖², J_AWI = Σ‖Tu‖²/‖u‖²,
//! J_MSWI = Σ‖Tu‖², J̃ = Σ(‖Su − d‖² + σ‖u‖²); the MSWI penalty carries a ½ and
//! the AWI penalty does not.

mod penalty;
mod report;
mod traveltime;

pub use penalty::{
    j_penalty_awi, j_penalty_mswi, penalty_report, PenaltyKind, PenaltyOptions, PenaltyReport,
    PenaltyTerm,
};
pub(crate) use report::gather_diagnostics;
pub use report::{j_awi, j_fwi, j_mswi, j_tilde, ObjectiveKind, ObjectiveReport, TraceTerm};
pub use traveltime::{misfit_weight, travel_time_misfit, weighted_tt_misfit};
