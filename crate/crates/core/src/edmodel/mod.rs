//! Emergency-department model: patient types, scenario configuration,
//! routing, the patient trajectory, KPI extraction and census.

pub mod census;
pub mod config;
pub mod kpi;
pub mod routing;
pub mod trajectory;
pub mod types;

pub use census::{census_log_from_records, hourly_census};
pub use config::{ScenarioConfig, UnitWeights};
pub use kpi::{extract_kpis, KpiMode, KpiSampleSet};
pub use routing::{assign_tag_and_unit, triage_duration, PatientDraws};
pub use types::{
    calibration_cells, decision_pairs, feasible_pairs, is_feasible, Activity, CellKey, Kpi,
    Outcome, PatientRecord, Seat, Tag, Unit,
};
