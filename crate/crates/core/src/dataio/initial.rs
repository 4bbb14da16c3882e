//! Starting point of the calibration from observed data.

use std::collections::{BTreeMap, HashMap};

use super::annotations::ExamRequestAnnotation;
use super::dataset::Dataset;
use super::fit::{fit_weibull_with, FitOptions};
use crate::distributions::weibull_mean_std;
use crate::edmodel::types::{Activity, Outcome, Tag, Unit};
use crate::edmodel::ScenarioConfig;
use crate::error::Result;
use crate::optimizer::params::{
    case_study_layout, parameter_pairs, Bounds, Granularity, ParamEntry, ParamVector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct InitialGuessOptions {
    /// Exam requests later than t2 + window are ignored, hours.
    pub window: f64,
    /// Placeholder triage law (shape, scale) for every pair.
    pub triage_default: (f64, f64),
    pub visit_default: (f64, f64),
    pub exams_default: (f64, f64),
    pub granularity: Granularity,
}

impl Default for InitialGuessOptions {
    fn default() -> Self {
        InitialGuessOptions {
            window: 4.0,
            triage_default: (1.0, 0.1),
            visit_default: (1.0, 0.5),
            exams_default: (1.0, 2.0),
            granularity: Granularity::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InitialGuess {
    pub params: ParamVector,
    /// One message per (activity, tag, unit) that fell back to its default.
    pub fallbacks: Vec<String>,
}

/// Parameter pair a record feeds: Red/RA shares Red/MU.
fn param_pair(tag: Tag, unit: Unit) -> (Tag, Unit) {
    if (tag, unit) == (Tag::Red, Unit::RA) {
        (Tag::Red, Unit::MU)
    } else {
        (tag, unit)
    }
}

/// Visit laws from {latest request in [t2, t2 + W]} − t2, exams laws from
/// t6 − that request − mean final wait; triage from the defaults.
pub fn initial_guess(
    ds: &Dataset,
    annotations: &[ExamRequestAnnotation],
    cfg: &ScenarioConfig,
    opts: &InitialGuessOptions,
) -> Result<InitialGuess> {
    let requests: HashMap<u64, &[f64]> = annotations
        .iter()
        .map(|a| (a.id, a.request_times.as_slice()))
        .collect();
    let mut visit: BTreeMap<(Tag, Unit), Vec<f64>> = BTreeMap::new();
    let mut exams: BTreeMap<(Tag, Unit), Vec<f64>> = BTreeMap::new();
    for r in &ds.records {
        let (Some(t2), Some(reqs)) = (r.t2, requests.get(&r.id)) else {
            continue;
        };
        let latest = reqs
            .iter()
            .copied()
            .filter(|t| *t >= t2 && *t <= t2 + opts.window)
            .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t))));
        let Some(end) = latest else { continue };
        let pair = param_pair(r.tag, r.unit);
        if end > t2 {
            visit.entry(pair).or_default().push(end - t2);
        }
        if let (Outcome::Discharged, Some(t6), Some(w)) =
            (r.outcome, r.t6, cfg.final_wait_for(r.tag, r.unit))
        {
            let gap = t6 - end - weibull_mean_std(&w)?.0;
            if gap > 0.0 {
                exams.entry(pair).or_default().push(gap);
            }
        }
    }

    let keys = case_study_layout();
    let bounds = Bounds::case_study(&keys);
    let scale_upper = |act: Activity| {
        keys.iter()
            .zip(&bounds.upper)
            .filter(|(k, _)| k.activity == act)
            .map(|(_, u)| *u)
            .fold(f64::INFINITY, f64::min)
    };
    let mut fallbacks = Vec::new();
    let mut entries = Vec::new();
    for (act, tag, unit) in parameter_pairs() {
        let (default, samples) = match act {
            Activity::Triage => (opts.triage_default, None),
            Activity::Visit => (opts.visit_default, Some(visit.get(&(tag, unit)))),
            Activity::Exams => (opts.exams_default, Some(exams.get(&(tag, unit)))),
        };
        let fit_opts = FitOptions {
            shape_bounds: (0.01, 1000.0),
            scale_bounds: (0.01, scale_upper(act)),
            granularity: opts.granularity,
        };
        let (shape, scale) = match samples {
            None => default,
            Some(s) => match fit_weibull_with(s.map_or(&[][..], |v| v.as_slice()), &fit_opts) {
                Ok(p) => (p.shape, p.scale),
                Err(e) => {
                    let msg = format!("{} {tag}/{unit}: {e}; using default", act.name());
                    log::warn!("{msg}");
                    fallbacks.push(msg);
                    default
                }
            },
        };
        entries.push(ParamEntry {
            activity: act,
            tag,
            unit,
            shape,
            scale,
        });
    }
    Ok(InitialGuess {
        params: ParamVector::from_entries(&entries)?,
        fallbacks,
    })
}
