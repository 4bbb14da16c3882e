//! Patient-record CSV files: `id,tag,unit,t0,t2,t5,t6,outcome`, times in
//! hours from the period start with 4 decimals, empty for missing values.
//! Metadata lives in a `<file>.meta.json` sidecar.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::DayOfWeek;
use crate::edmodel::types::{is_feasible, PatientRecord};
use crate::error::{Error, Result};

pub const HEADER: [&str; 8] = ["id", "tag", "unit", "t0", "t2", "t5", "t6", "outcome"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub start_day: DayOfWeek,
    pub period_days: f64,
}

impl Default for DatasetMeta {
    fn default() -> Self {
        DatasetMeta {
            start_day: DayOfWeek::Mon,
            period_days: 31.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub records: Vec<PatientRecord>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn period_hours(&self) -> f64 {
        self.meta.period_days * 24.0
    }

    /// Record invariants, period membership and assignment feasibility.
    pub fn validate(&self) -> Result<()> {
        let infeasible: Vec<String> = self
            .records
            .iter()
            .filter(|r| !is_feasible(r.tag, r.unit))
            .map(|r| r.id.to_string())
            .collect();
        if !infeasible.is_empty() {
            return Err(Error::DataValidation(format!(
                "infeasible tag/unit assignment in records {}",
                infeasible.join(", ")
            )));
        }
        let end = self.period_hours();
        for r in &self.records {
            r.validate()?;
            let times = [Some(r.t0), r.t2, r.t5, r.t6];
            if times.iter().flatten().any(|t| !(*t >= 0.0 && *t <= end)) {
                return Err(Error::DataValidation(format!(
                    "record {}: timestamp outside [0, {end}]",
                    r.id
                )));
            }
        }
        Ok(())
    }
}

fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn fmt_time(t: Option<f64>) -> String {
    t.map(|v| format!("{v:.4}")).unwrap_or_default()
}

pub fn write_records<W: Write>(records: &[PatientRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.id.to_string(),
            r.tag.code().to_string(),
            r.unit.code().to_string(),
            fmt_time(Some(r.t0)),
            fmt_time(r.t2),
            fmt_time(r.t5),
            fmt_time(r.t6),
            r.outcome.code().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses records; `path` only labels errors.
pub fn read_records<R: Read>(input: R, path: &Path) -> Result<Vec<PatientRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(parse_err(
            1,
            format!("expected header {}", HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or("").trim();
        let time = |i: usize| -> Result<Option<f64>> {
            let s = field(i);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| parse_err(line, format!("{}: bad number {s:?}", HEADER[i])))
        };
        let id = field(0)
            .parse::<u64>()
            .map_err(|_| parse_err(line, format!("bad id {:?}", field(0))))?;
        let t0 = time(3)?.ok_or_else(|| parse_err(line, "t0 is required".into()))?;
        out.push(PatientRecord {
            id,
            tag: field(1)
                .parse()
                .map_err(|e: Error| parse_err(line, e.to_string()))?,
            unit: field(2)
                .parse()
                .map_err(|e: Error| parse_err(line, e.to_string()))?,
            t0,
            t2: time(4)?,
            t5: time(5)?,
            t6: time(6)?,
            outcome: field(7)
                .parse()
                .map_err(|e: Error| parse_err(line, e.to_string()))?,
        });
    }
    Ok(out)
}

/// Loads and validates a dataset. Without a sidecar the metadata defaults
/// to a 31-day period starting on Monday.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let records = read_records(file, path)?;
    let mp = meta_path(path);
    let meta = if mp.exists() {
        serde_json::from_str(&std::fs::read_to_string(&mp)?)?
    } else {
        DatasetMeta::default()
    };
    let ds = Dataset { records, meta };
    ds.validate()?;
    Ok(ds)
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_records(&ds.records, std::io::BufWriter::new(file))?;
    std::fs::write(meta_path(path), serde_json::to_string_pretty(&ds.meta)?)?;
    Ok(())
}
