use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One line per evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub eval: usize,
    pub f: f64,
    pub max_g: f64,
    pub max_h: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DiagnosticsLog {
    pub rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsLog {
    pub fn push(&mut self, row: DiagnosticsRow) {
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(["eval", "f", "max_g", "max_h", "wall_seconds"])?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let mut log = DiagnosticsLog::default();
        log.push(DiagnosticsRow {
            eval: 1,
            f: 0.5,
            max_g: -0.1,
            max_h: 0.2,
            wall_seconds: 0.01,
        });
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next(), Some("eval,f,max_g,max_h,wall_seconds"));
        assert_eq!(s.lines().count(), 2);
    }
}
