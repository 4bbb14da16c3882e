use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::edmodel::types::{calibration_cells, CellKey, Tag, Unit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpiStats {
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single sample.
    pub std: f64,
    pub count: usize,
}

impl KpiStats {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std = if samples.len() < 2 {
            0.0
        } else {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1.0)).sqrt()
        };
        Ok(KpiStats {
            mean,
            std,
            count: samples.len(),
        })
    }
}

fn relative_gap(sim: f64, real: f64, tol: f64, what: &str) -> Result<f64> {
    if real == 0.0 {
        return Err(Error::DegenerateReference(format!(
            "reference {what} is zero"
        )));
    }
    Ok(((sim - real) / real).abs() - tol)
}

/// |(μ_sim − μ_real)/μ_real| − tol; feasible iff ≤ 0.
pub fn constraint_g(mu_sim: f64, mu_real: f64, tol: f64) -> Result<f64> {
    relative_gap(mu_sim, mu_real, tol, "mean")
}

/// |(σ_sim − σ_real)/σ_real| − tol; feasible iff ≤ 0.
pub fn constraint_h(sd_sim: f64, sd_real: f64, tol: f64) -> Result<f64> {
    relative_gap(sd_sim, sd_real, tol, "standard deviation")
}

/// Relative tolerances on mean and std, per calibration cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub mu: BTreeMap<CellKey, f64>,
    pub sigma: BTreeMap<CellKey, f64>,
}

impl Tolerances {
    pub fn uniform(cells: &[CellKey], tol: f64) -> Self {
        Tolerances {
            mu: cells.iter().map(|c| (*c, tol)).collect(),
            sigma: cells.iter().map(|c| (*c, tol)).collect(),
        }
    }

    /// 0.35 for Green/Yellow patients in MU or SU, 0.2 for the other cells.
    pub fn case_study() -> Self {
        let cells = calibration_cells();
        let tol = |c: &CellKey| {
            let loose =
                matches!(c.tag, Tag::Green | Tag::Yellow) && matches!(c.unit, Unit::MU | Unit::SU);
            if loose {
                0.35
            } else {
                0.2
            }
        };
        Tolerances {
            mu: cells.iter().map(|c| (*c, tol(c))).collect(),
            sigma: cells.iter().map(|c| (*c, tol(c))).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (c, t) in self.mu.iter().chain(&self.sigma) {
            if !(*t > 0.0) {
                return Err(Error::Config(format!("tolerance for {c} must be positive")));
            }
        }
        Ok(())
    }
}
