use std::collections::BTreeMap;

use super::types::{CellKey, Kpi, Outcome, PatientRecord};
use crate::error::{Error, Result};

/// Which DIT rule applies: observed data may carry t5, simulated data never does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpiMode {
    Real,
    Simulated,
}

/// Durations per (tag, unit, KPI).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KpiSampleSet {
    cells: BTreeMap<CellKey, Vec<f64>>,
}

impl KpiSampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: CellKey, value: f64) {
        self.cells.entry(key).or_default().push(value);
    }

    /// Samples of `key`; empty slice if none.
    pub fn get(&self, key: &CellKey) -> &[f64] {
        self.cells.get(key).map_or(&[], |v| v.as_slice())
    }

    pub fn is_empty(&self) -> bool {
        self.cells.values().all(|v| v.is_empty())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CellKey, &Vec<f64>)> {
        self.cells.iter()
    }

    pub fn total(&self) -> usize {
        self.cells.values().map(Vec::len).sum()
    }
}

/// DOT for every record with t2; DIT only for discharged records.
pub fn extract_kpis(records: &[PatientRecord], mode: KpiMode) -> Result<KpiSampleSet> {
    let mut out = KpiSampleSet::new();
    for r in records {
        let Some(t2) = r.t2 else { continue };
        if t2 < r.t0 {
            return Err(Error::DataValidation(format!("record {}: t2 < t0", r.id)));
        }
        out.push(CellKey::new(r.tag, r.unit, Kpi::DOT), t2 - r.t0);
        if r.outcome != Outcome::Discharged {
            continue;
        }
        let end = match (mode, r.t5) {
            (KpiMode::Real, Some(t5)) => t5,
            _ => r.t6.ok_or_else(|| {
                Error::DataValidation(format!("record {}: discharged without t6", r.id))
            })?,
        };
        if end < t2 {
            return Err(Error::DataValidation(format!(
                "record {}: discharge before visit",
                r.id
            )));
        }
        out.push(CellKey::new(r.tag, r.unit, Kpi::DIT), end - t2);
    }
    Ok(out)
}
