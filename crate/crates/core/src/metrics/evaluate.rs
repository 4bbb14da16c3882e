//! Objective, constraints and the sample-average evaluation of a parameter point.

use std::collections::BTreeMap;

use serde::Serialize;

use super::ecdf::{ecdf, ecdf_sq_integral, mean_ecdf, StepFunction};
use super::stats::{constraint_g, constraint_h, KpiStats, Tolerances};
use crate::edmodel::kpi::KpiSampleSet;
use crate::edmodel::types::CellKey;
use crate::edmodel::ScenarioConfig;
use crate::error::{Error, Result};
use crate::optimizer::params::ParamVector;
use crate::simcore::{run_replications, ReplicationOutput};

/// Σ over cells of ∫(F_sim − F_real)².
pub fn objective(
    sim: &BTreeMap<CellKey, StepFunction>,
    real: &BTreeMap<CellKey, StepFunction>,
) -> Result<f64> {
    if sim.len() != real.len() || sim.keys().zip(real.keys()).any(|(a, b)| a != b) {
        return Err(Error::IndexMismatch(
            "simulated and observed ECDFs cover different cells".into(),
        ));
    }
    Ok(sim.iter().map(|(k, f)| ecdf_sq_integral(f, &real[k])).sum())
}

/// Observed-side data of the calibration problem.
#[derive(Debug, Clone)]
pub struct CalibrationTarget {
    pub cells: Vec<CellKey>,
    pub ecdfs: BTreeMap<CellKey, StepFunction>,
    pub stats: BTreeMap<CellKey, KpiStats>,
    pub tolerances: Tolerances,
}

impl CalibrationTarget {
    /// Target over the cells listed in `tolerances`. Every cell must hold
    /// at least one observed sample.
    pub fn new(real: &KpiSampleSet, tolerances: Tolerances) -> Result<Self> {
        tolerances.validate()?;
        let cells: Vec<CellKey> = tolerances.mu.keys().copied().collect();
        if cells.iter().any(|c| !tolerances.sigma.contains_key(c)) {
            return Err(Error::Config(
                "mean and std tolerances cover different cells".into(),
            ));
        }
        let mut ecdfs = BTreeMap::new();
        let mut stats = BTreeMap::new();
        let mut empty = Vec::new();
        for c in &cells {
            let s = real.get(c);
            if s.is_empty() {
                empty.push(c.to_string());
                continue;
            }
            ecdfs.insert(*c, ecdf(s)?);
            let st = KpiStats::from_samples(s)?;
            if st.mean == 0.0 {
                log::warn!("{c}: observed mean is zero; mean constraint dropped");
            }
            if st.std == 0.0 {
                log::warn!("{c}: observed std is zero; std constraint dropped");
            }
            stats.insert(*c, st);
        }
        if !empty.is_empty() {
            return Err(Error::DataValidation(format!(
                "no observed samples for {}",
                empty.join(", ")
            )));
        }
        Ok(CalibrationTarget {
            cells,
            ecdfs,
            stats,
            tolerances,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub cell: String,
    pub integral: f64,
    pub mu_sim: f64,
    pub mu_real: f64,
    pub sd_sim: f64,
    pub sd_real: f64,
    pub g: Option<f64>,
    pub h: Option<f64>,
}

/// f, g, h of one point. A `None` constraint was dropped because its
/// reference value is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub g: Vec<Option<f64>>,
    pub h: Vec<Option<f64>>,
    pub cells: Vec<CellResult>,
}

impl Evaluation {
    /// Active constraint values, g then h.
    pub fn constraints(&self) -> Vec<f64> {
        self.g.iter().chain(&self.h).flatten().copied().collect()
    }

    pub fn max_g(&self) -> f64 {
        self.g
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_h(&self) -> f64 {
        self.h
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// max(0, largest constraint value).
    pub fn max_violation(&self) -> f64 {
        self.max_g().max(self.max_h()).max(0.0)
    }

    pub fn is_feasible(&self) -> bool {
        self.constraints().iter().all(|v| *v <= 0.0)
    }
}

/// Evaluates simulated replication outputs against the target: averaged
/// ECDFs for f, replication-averaged means and stds for g and h.
pub fn evaluate_outputs(
    outputs: &[ReplicationOutput],
    target: &CalibrationTarget,
) -> Result<Evaluation> {
    let kpis: Vec<&KpiSampleSet> = outputs.iter().map(|o| &o.kpis).collect();
    evaluate_kpis(&kpis, target)
}

pub fn evaluate_kpis(reps: &[&KpiSampleSet], target: &CalibrationTarget) -> Result<Evaluation> {
    let mut sim = BTreeMap::new();
    let mut g = Vec::with_capacity(target.cells.len());
    let mut h = Vec::with_capacity(target.cells.len());
    let mut cells = Vec::with_capacity(target.cells.len());
    for c in &target.cells {
        let mut fs = Vec::new();
        let mut means = Vec::new();
        let mut stds = Vec::new();
        for k in reps {
            let s = k.get(c);
            if s.is_empty() {
                continue;
            }
            fs.push(ecdf(s)?);
            let st = KpiStats::from_samples(s)?;
            means.push(st.mean);
            stds.push(st.std);
        }
        if fs.is_empty() {
            return Err(Error::EvaluationFailure(format!(
                "no simulated samples for {c} in any replication"
            )));
        }
        let f_sim = mean_ecdf(&fs)?;
        let n = means.len() as f64;
        let mu_sim = means.iter().sum::<f64>() / n;
        let sd_sim = stds.iter().sum::<f64>() / n;
        let real = &target.stats[c];
        let gi = match constraint_g(mu_sim, real.mean, target.tolerances.mu[c]) {
            Ok(v) => Some(v),
            Err(Error::DegenerateReference(_)) => None,
            Err(e) => return Err(e),
        };
        let hi = match constraint_h(sd_sim, real.std, target.tolerances.sigma[c]) {
            Ok(v) => Some(v),
            Err(Error::DegenerateReference(_)) => None,
            Err(e) => return Err(e),
        };
        cells.push(CellResult {
            cell: c.to_string(),
            integral: ecdf_sq_integral(&f_sim, &target.ecdfs[c]),
            mu_sim,
            mu_real: real.mean,
            sd_sim,
            sd_real: real.std,
            g: gi,
            h: hi,
        });
        g.push(gi);
        h.push(hi);
        sim.insert(*c, f_sim);
    }
    let f = objective(&sim, &target.ecdfs)?;
    Ok(Evaluation { f, g, h, cells })
}

/// Runs `n_reps` replications of `params` with `base_seed` and evaluates them.
/// Keeping `base_seed` fixed makes this a deterministic function of `params`.
pub fn evaluate_point(
    params: &ParamVector,
    cfg: &ScenarioConfig,
    target: &CalibrationTarget,
    n_reps: usize,
    base_seed: u64,
) -> Result<Evaluation> {
    let outputs = run_replications(cfg, params, n_reps, base_seed, true)?;
    evaluate_outputs(&outputs, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edmodel::types::{Kpi, Tag, Unit};

    fn set(cell: CellKey, samples: &[f64]) -> KpiSampleSet {
        let mut k = KpiSampleSet::new();
        for s in samples {
            k.push(cell, *s);
        }
        k
    }

    #[test]
    fn objective_examples() {
        let c = CellKey::new(Tag::Green, Unit::SU, Kpi::DOT);
        let a: BTreeMap<_, _> = [(c, ecdf(&[1.0]).unwrap())].into();
        let b: BTreeMap<_, _> = [(c, ecdf(&[2.0]).unwrap())].into();
        assert_eq!(objective(&a, &a).unwrap(), 0.0);
        assert_eq!(objective(&a, &b).unwrap(), 1.0);
        let other = CellKey::new(Tag::Red, Unit::SU, Kpi::DOT);
        let d: BTreeMap<_, _> = [(other, ecdf(&[2.0]).unwrap())].into();
        assert!(matches!(objective(&a, &d), Err(Error::IndexMismatch(_))));
    }

    #[test]
    fn self_comparison_is_zero() {
        let c = CellKey::new(Tag::Green, Unit::SU, Kpi::DOT);
        let real = set(c, &[0.5, 1.0, 2.5]);
        let target = CalibrationTarget::new(&real, Tolerances::uniform(&[c], 0.2)).unwrap();
        let e = evaluate_kpis(&[&real], &target).unwrap();
        assert_eq!(e.f, 0.0);
        assert_eq!(e.g, vec![Some(-0.2)]);
        assert_eq!(e.h, vec![Some(-0.2)]);
    }

    #[test]
    fn empty_cells() {
        let c = CellKey::new(Tag::Green, Unit::SU, Kpi::DOT);
        let real = set(c, &[1.0, 2.0]);
        let target = CalibrationTarget::new(&real, Tolerances::uniform(&[c], 0.2)).unwrap();
        let empty = KpiSampleSet::new();
        assert!(matches!(
            evaluate_kpis(&[&empty, &empty], &target),
            Err(Error::EvaluationFailure(_))
        ));
        // one empty replication is skipped
        let e = evaluate_kpis(&[&empty, &real], &target).unwrap();
        assert_eq!(e.f, 0.0);
        assert!(CalibrationTarget::new(&empty, Tolerances::uniform(&[c], 0.2)).is_err());
    }

    #[test]
    fn degenerate_std_drops_constraint() {
        let c = CellKey::new(Tag::Red, Unit::MU, Kpi::DIT);
        let real = set(c, &[2.0, 2.0]);
        let target = CalibrationTarget::new(&real, Tolerances::uniform(&[c], 0.2)).unwrap();
        let sim = set(c, &[1.0, 3.0]);
        let e = evaluate_kpis(&[&sim], &target).unwrap();
        assert_eq!(e.h, vec![None]);
        assert_eq!(e.g, vec![Some(-0.2)]);
        assert_eq!(e.constraints().len(), 1);
    }
}
