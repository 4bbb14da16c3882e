//! ECDFs, the squared-ECDF-difference objective and the mean/std constraints.

pub mod diagnostics;
pub mod ecdf;
pub mod evaluate;
pub mod stats;

pub use diagnostics::{DiagnosticsLog, DiagnosticsRow};
pub use ecdf::{ecdf, ecdf_sq_integral, mean_ecdf, StepFunction};
pub use evaluate::{
    evaluate_kpis, evaluate_outputs, evaluate_point, objective, CalibrationTarget, CellResult,
    Evaluation,
};
pub use stats::{constraint_g, constraint_h, KpiStats, Tolerances};
