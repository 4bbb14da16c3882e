//! Exam-request annotations: CSV `id,request_time`, one row per request.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExamRequestAnnotation {
    pub id: u64,
    pub request_times: Vec<f64>,
}

pub fn write_annotations<W: Write>(notes: &[ExamRequestAnnotation], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "request_time"])?;
    for a in notes {
        for t in &a.request_times {
            w.write_record([a.id.to_string(), format!("{t:.4}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Groups rows by id, keeping ids in ascending order.
pub fn read_annotations<R: Read>(input: R, path: &Path) -> Result<Vec<ExamRequestAnnotation>> {
    let mut rdr = csv::Reader::from_reader(input);
    let err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().ne(["id", "request_time"]) {
        return Err(err(1, "expected header id,request_time".into()));
    }
    let mut by_id: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let id = row
            .get(0)
            .and_then(|s| s.trim().parse::<u64>().ok())
            .ok_or_else(|| err(line, "bad id".into()))?;
        let t = row
            .get(1)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(line, "bad request_time".into()))?;
        by_id.entry(id).or_default().push(t);
    }
    Ok(by_id
        .into_iter()
        .map(|(id, request_times)| ExamRequestAnnotation { id, request_times })
        .collect())
}

pub fn load_annotations(path: &Path) -> Result<Vec<ExamRequestAnnotation>> {
    read_annotations(std::fs::File::open(path)?, path)
}

pub fn save_annotations(path: &Path, notes: &[ExamRequestAnnotation]) -> Result<()> {
    write_annotations(notes, std::io::BufWriter::new(std::fs::File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_groups_by_id() {
        let notes = vec![
            ExamRequestAnnotation {
                id: 3,
                request_times: vec![1.5, 2.25],
            },
            ExamRequestAnnotation {
                id: 9,
                request_times: vec![4.0],
            },
        ];
        let mut buf = Vec::new();
        write_annotations(&notes, &mut buf).unwrap();
        let back = read_annotations(buf.as_slice(), Path::new("a.csv")).unwrap();
        assert_eq!(back, notes);
    }
}
