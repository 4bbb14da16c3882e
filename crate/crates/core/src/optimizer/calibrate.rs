//! Calibration driver: lattice search over ED parameters against observed KPIs.

use std::time::Instant;

use super::params::{Bounds, Granularity, ParamVector};
use super::solve::{solve, PointValue, SolveOptions, SolveReport};
use crate::edmodel::ScenarioConfig;
use crate::error::Result;
use crate::metrics::{
    evaluate_point, CalibrationTarget, DiagnosticsLog, DiagnosticsRow, Evaluation,
};

/// Everything held fixed while the parameters move.
#[derive(Debug, Clone)]
pub struct CalibrationProblem {
    pub cfg: ScenarioConfig,
    pub target: CalibrationTarget,
    pub n_reps: usize,
    /// Fixed for the whole search (common random numbers).
    pub base_seed: u64,
    pub bounds: Bounds,
    pub granularity: Granularity,
}

#[derive(Debug, Clone)]
pub struct CalibrationResult {
    pub best: ParamVector,
    pub report: SolveReport,
    /// Full evaluation of the best point; None if the simulation failed there.
    pub evaluation: Option<Evaluation>,
    pub diagnostics: DiagnosticsLog,
}

impl CalibrationProblem {
    pub fn evaluate(&self, params: &ParamVector) -> Result<Evaluation> {
        evaluate_point(params, &self.cfg, &self.target, self.n_reps, self.base_seed)
    }

    /// Searches from `start`. The objective is nonnegative, so a feasible
    /// point with f = 0 ends the search at once.
    pub fn run(&self, start: &ParamVector, opts: &SolveOptions) -> Result<CalibrationResult> {
        let deltas = self.granularity.deltas(start.keys());
        let mut diagnostics = DiagnosticsLog::default();
        let t0 = Instant::now();
        let mut last: Option<(Vec<f64>, Evaluation)> = None;
        let mut opts = opts.clone();
        opts.f_lower_bound.get_or_insert(0.0);
        let report = {
            let eval = |values: &[f64]| -> Result<PointValue> {
                let p = start.with_values(values.to_vec())?;
                let t = Instant::now();
                let res = self.evaluate(&p);
                let (f, max_g, max_h) = match &res {
                    Ok(e) => (e.f, e.max_g(), e.max_h()),
                    Err(_) => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
                };
                diagnostics.push(DiagnosticsRow {
                    eval: diagnostics.rows.len() + 1,
                    f,
                    max_g,
                    max_h,
                    wall_seconds: t.elapsed().as_secs_f64(),
                });
                let e = res?;
                let pv = PointValue {
                    f: e.f,
                    constraints: e.constraints(),
                };
                last = Some((values.to_vec(), e));
                Ok(pv)
            };
            solve(eval, start.values(), &self.bounds, &deltas, &opts)?
        };
        log::info!(
            "search stopped ({:?}) after {} evaluations in {:.1}s",
            report.stop_reason,
            report.evaluations_used,
            t0.elapsed().as_secs_f64()
        );
        let best = start.with_values(report.best_point.clone())?;
        let evaluation = match last {
            Some((v, e)) if v == report.best_point => Some(e),
            _ => self.evaluate(&best).ok(),
        };
        Ok(CalibrationResult {
            best,
            report,
            evaluation,
            diagnostics,
        })
    }
}
