//! Harnesses that measure the asymptotic behaviour of the objectives: λ and σ
//! sweeps, remainder effects, penalty limits, cycle-skipping scans, descent and
//! the multiple-arrival counterexample.

mod multi;
mod penalty;
mod scan;
mod scenario;
mod sweeps;
mod table;

pub use multi::{expected_lobes, multi_arrival_demo, multi_arrival_onset};
pub use penalty::{desk_penalty_check, penalty_limit_check, DeskModel, DeskSolution, PenaltyLimit};
pub use scan::{
    family_objective, local_descent, objective_scan, relative_grid, DescentOptions, ModelFamily,
    ScanCurve, ScanResult, StopReason, Trajectory,
};
pub use scenario::{
    coupling_r, default_lambdas, ArrivalScenario, Scenario, DEFAULT_DT, DEFAULT_HALF_SUPPORT,
};
pub use sweeps::{lambda_sweep, remainder_effect, sigma_coupling_sweep, LAMBDA_COLUMNS, REMAINDER_COLUMNS};
pub use table::{slope_fit, strict_local_minima, Fit, SweepTable};
