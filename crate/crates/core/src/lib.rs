//! Calibration toolkit for emergency-department discrete-event simulation models.
//!
//! Missing service-time parameters (triage, visit, exams) are recovered by
//! minimizing the squared-ECDF-difference between simulated and observed
//! door-to-doctor (DOT) and doctor-to-discharge (DIT) times, subject to
//! relative accuracy constraints on their means and standard deviations.
//!
//! Layout:
//! - [`distributions`]: seeded variate generation (Weibull, uniform, categorical, NHPP).
//! - [`simcore`]: event calendar, scheduled-capacity resources, replication runner.
//! - [`edmodel`]: patient trajectories, scenario configuration, KPI extraction.
//! - [`metrics`]: ECDFs, objective, constraints, point evaluation.
//! - [`optimizer`]: granular parameter vectors and the lattice search.
//! - [`dataio`]: dataset files, synthetic data, Weibull fitting, starting point.

pub mod dataio;
pub mod distributions;
pub mod edmodel;
pub mod error;
pub mod metrics;
pub mod optimizer;
pub mod simcore;

pub use error::{Error, Result};
