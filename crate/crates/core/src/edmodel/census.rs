use std::collections::BTreeMap;

use crate::edmodel::types::{Outcome, PatientRecord, Tag, Unit};
use crate::error::{Error, Result};

/// Adds `weight` per hour spent in each hour-of-day over `[a, b)`.
fn spread(a: f64, b: f64, weight: f64, acc: &mut [f64; 24]) {
    let mut t = a;
    while t < b {
        let next = (t.floor() + 1.0).min(b);
        let h = (t.floor() as i64).rem_euclid(24) as usize;
        acc[h] += weight * (next - t);
        t = next;
    }
}

/// Time-average of the census for each hour of day over `window`.
///
/// `log` holds (time, ±1) changes; entries before the window set the
/// initial level. Times are hours from a midnight.
pub fn hourly_census(log: &[(f64, i8)], window: (f64, f64)) -> Result<[f64; 24]> {
    let (start, end) = window;
    if !(end > start) {
        return Err(Error::Config(format!(
            "empty census window [{start}, {end})"
        )));
    }
    let mut events = log.to_vec();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut exposure = [0.0; 24];
    spread(start, end, 1.0, &mut exposure);

    let mut area = [0.0; 24];
    let mut level = 0i64;
    let mut last = start;
    for (t, d) in events {
        if t > last && t > start {
            let a = last.max(start);
            let b = t.min(end);
            if level != 0 && b > a {
                spread(a, b, level as f64, &mut area);
            }
            last = t;
        }
        level += d as i64;
        if t >= end {
            break;
        }
    }
    if level != 0 && last < end {
        spread(last.max(start), end, level as f64, &mut area);
    }

    let mut out = [0.0; 24];
    for h in 0..24 {
        if exposure[h] > 0.0 {
            out[h] = area[h] / exposure[h];
        }
    }
    Ok(out)
}

/// Census changes rebuilt from records: +1 at t2, −1 at t6. Records that
/// left during exams carry no exit time and are skipped; patients still in
/// treatment at the end of the period never leave.
pub fn census_log_from_records(records: &[PatientRecord]) -> BTreeMap<(Tag, Unit), Vec<(f64, i8)>> {
    let mut out: BTreeMap<(Tag, Unit), Vec<(f64, i8)>> = BTreeMap::new();
    for r in records {
        let Some(t2) = r.t2 else { continue };
        if r.outcome == Outcome::LeftDuringExams {
            continue;
        }
        let log = out.entry((r.tag, r.unit)).or_default();
        log.push((t2, 1));
        if let Some(t6) = r.t6 {
            log.push((t6, -1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const WINDOW: (f64, f64) = (0.0, 31.0 * 24.0);

    #[test]
    fn empty_log_is_zero() {
        assert_eq!(hourly_census(&[], WINDOW).unwrap(), [0.0; 24]);
    }

    #[test]
    fn one_patient_for_two_hours() {
        let day10 = 9.0 * 24.0;
        let c = hourly_census(&[(day10 + 9.0, 1), (day10 + 11.0, -1)], WINDOW).unwrap();
        for (h, v) in c.iter().enumerate() {
            let expect = if h == 9 || h == 10 { 1.0 / 31.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12, "hour {h}: {v}");
        }
    }

    #[test]
    fn constant_census() {
        let c = hourly_census(&[(-5.0, 1), (-1.0, 1)], WINDOW).unwrap();
        assert!(c.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn empty_window_is_error() {
        assert!(hourly_census(&[], (5.0, 5.0)).is_err());
    }

    #[test]
    fn census_from_records() {
        let rec = |id, t2, t6, outcome| PatientRecord {
            id,
            tag: Tag::Green,
            unit: Unit::SU,
            t0: 0.0,
            t2,
            t5: None,
            t6,
            outcome,
        };
        let log = census_log_from_records(&[
            rec(0, Some(1.0), Some(3.0), Outcome::Discharged),
            rec(1, Some(2.0), None, Outcome::LeftDuringExams),
            rec(2, Some(2.5), None, Outcome::InSystem),
            rec(3, None, None, Outcome::Lwbs),
        ]);
        assert_eq!(
            log[&(Tag::Green, Unit::SU)],
            vec![(1.0, 1), (3.0, -1), (2.5, 1)]
        );
    }
}
