use std::collections::BTreeMap;

use rayon::prelude::*;

use super::trace::TraceEvent;
use crate::distributions::{nhpp_arrivals, RngStream};
use crate::edmodel::kpi::{extract_kpis, KpiMode, KpiSampleSet};
use crate::edmodel::routing::PatientDraws;
use crate::edmodel::trajectory::simulate;
use crate::edmodel::types::{Outcome, PatientRecord, Tag, Unit};
use crate::edmodel::ScenarioConfig;
use crate::error::{Error, Result};
use crate::optimizer::params::ParamVector;

/// Whole-run entity counts (warm-up included).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReplicationTally {
    pub created: u64,
    /// Routed to units outside the model right after tagging.
    pub diverted: u64,
    pub deceased: u64,
    pub lwbs: u64,
    pub left_during_exams: u64,
    pub transferred: u64,
    pub discharged: u64,
    pub in_system: u64,
}

impl ReplicationTally {
    pub fn is_conserved(&self) -> bool {
        self.created
            == self.diverted
                + self.deceased
                + self.lwbs
                + self.left_during_exams
                + self.transferred
                + self.discharged
                + self.in_system
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub trace: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ReplicationOutput {
    pub kpis: KpiSampleSet,
    /// Discharged window patients per (tag, unit).
    pub patient_counts: BTreeMap<(Tag, Unit), u64>,
    pub census_log: BTreeMap<(Tag, Unit), Vec<(f64, i8)>>,
    pub records: Vec<PatientRecord>,
    pub tally: ReplicationTally,
    pub trace: Option<Vec<TraceEvent>>,
}

fn stream_base(rep: u64) -> Result<u64> {
    if rep >= 1 << 32 {
        return Err(Error::Config(format!("replication index {rep} too large")));
    }
    Ok(rep << 32)
}

/// Arrival times and per-patient uniforms of replication `rep`.
///
/// Arrivals use stream `rep << 32`; patient `i` uses `(rep << 32) | (i + 1)`.
pub fn replication_inputs(
    cfg: &ScenarioConfig,
    rep: u64,
    base_seed: u64,
) -> Result<Vec<(f64, PatientDraws)>> {
    let base = stream_base(rep)?;
    let mut rng = RngStream::new(base_seed, base);
    let times = nhpp_arrivals(&cfg.rate_table, cfg.start_day, cfg.horizon, &mut rng)?;
    Ok(times
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut r = RngStream::new(base_seed, base | (i as u64 + 1));
            (t, PatientDraws::draw(&mut r))
        })
        .collect())
}

pub fn run_replication(
    cfg: &ScenarioConfig,
    params: &ParamVector,
    rep: u64,
    base_seed: u64,
) -> Result<ReplicationOutput> {
    run_replication_with(cfg, params, rep, base_seed, &RunOptions::default())
}

pub fn run_replication_with(
    cfg: &ScenarioConfig,
    params: &ParamVector,
    rep: u64,
    base_seed: u64,
    opts: &RunOptions,
) -> Result<ReplicationOutput> {
    cfg.validate()?;
    let inputs = replication_inputs(cfg, rep, base_seed)?;
    let out = simulate(cfg, params, &inputs, opts.trace)?;
    let kpis = extract_kpis(&out.records, KpiMode::Simulated)?;
    let mut patient_counts = BTreeMap::new();
    for r in out
        .records
        .iter()
        .filter(|r| r.outcome == Outcome::Discharged)
    {
        *patient_counts.entry((r.tag, r.unit)).or_insert(0) += 1;
    }
    Ok(ReplicationOutput {
        kpis,
        patient_counts,
        census_log: out.census_log,
        records: out.records,
        tally: out.tally,
        trace: out.trace,
    })
}

/// Replications `0..n_reps`; the result does not depend on `parallel`.
pub fn run_replications(
    cfg: &ScenarioConfig,
    params: &ParamVector,
    n_reps: usize,
    base_seed: u64,
    parallel: bool,
) -> Result<Vec<ReplicationOutput>> {
    if n_reps == 0 {
        return Err(Error::Config("at least one replication is required".into()));
    }
    let run = |r: usize| run_replication(cfg, params, r as u64, base_seed);
    if parallel {
        (0..n_reps).into_par_iter().map(run).collect()
    } else {
        (0..n_reps).map(run).collect()
    }
}
