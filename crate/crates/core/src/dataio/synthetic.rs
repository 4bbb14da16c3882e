//! Ground-truth datasets simulated from known parameters.

use super::annotations::ExamRequestAnnotation;
use super::dataset::{Dataset, DatasetMeta};
use crate::edmodel::routing::service_params;
use crate::edmodel::types::Activity;
use crate::edmodel::ScenarioConfig;
use crate::error::Result;
use crate::optimizer::params::ParamVector;
use crate::simcore::replication::replication_inputs;
use crate::simcore::run_replication;

/// Window records of replication 0 under `seed`. t5 is left empty, so the
/// observed DIT is t6 − t2 as on the simulated side. Times are not rounded;
/// writing the dataset rounds them to 4 decimals.
pub fn gen_synthetic(
    true_params: &ParamVector,
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<Dataset> {
    let out = run_replication(cfg, true_params, 0, seed)?;
    Ok(Dataset {
        records: out.records,
        meta: DatasetMeta {
            start_day: cfg.window_start_day(),
            period_days: cfg.window_hours() / 24.0,
        },
    })
}

/// As `gen_synthetic`, plus one exam request per visited patient placed
/// exactly at the end of the visit.
pub fn gen_synthetic_with_annotations(
    true_params: &ParamVector,
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<(Dataset, Vec<ExamRequestAnnotation>)> {
    let ds = gen_synthetic(true_params, cfg, seed)?;
    let inputs = replication_inputs(cfg, 0, seed)?;
    let mut notes = Vec::new();
    for r in &ds.records {
        let Some(t2) = r.t2 else { continue };
        let draws = inputs[r.id as usize].1;
        let w = service_params(
            true_params,
            Activity::Visit,
            r.tag,
            r.unit,
            draws.triage_coin,
        )?;
        notes.push(ExamRequestAnnotation {
            id: r.id,
            request_times: vec![t2 + w.quantile_of_survival(draws.visit)],
        });
    }
    Ok((ds, notes))
}
