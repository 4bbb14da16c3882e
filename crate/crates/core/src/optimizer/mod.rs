//! Granular parameter vectors, bounds, and the penalized lattice search.

pub mod calibrate;
pub mod params;
pub mod solve;

pub use calibrate::{CalibrationProblem, CalibrationResult};
pub use params::{
    case_study_layout, from_lattice, to_lattice, Bounds, Granularity, ParamEntry, ParamKey,
    ParamVector, Role,
};
pub use solve::{penalty, solve, HistoryEntry, PointValue, SolveOptions, SolveReport, StopReason};
