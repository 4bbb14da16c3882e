//! Decision vector of Weibull (shape, scale) pairs per (activity, tag, unit).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::WeibullParams;
use crate::edmodel::types::{decision_pairs, Activity, Tag, Unit};
use crate::error::{Error, Result};

const REFERENCE_PARAMS: &str = include_str!("../../data/reference_params.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Shape,
    Scale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamKey {
    pub activity: Activity,
    pub tag: Tag,
    pub unit: Unit,
    pub role: Role,
}

impl std::fmt::Display for ParamKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.activity.name(),
            self.tag,
            self.unit,
            match self.role {
                Role::Shape => "shape",
                Role::Scale => "scale",
            }
        )
    }
}

/// (activity, tag, unit) pairs carrying parameters. Green/MIU triage is
/// absent: those patients reuse the Green/MU or Green/SU triage law.
pub fn parameter_pairs() -> Vec<(Activity, Tag, Unit)> {
    let mut out = Vec::new();
    for act in Activity::ALL {
        for (t, u) in decision_pairs() {
            if act == Activity::Triage && (t, u) == (Tag::Green, Unit::MIU) {
                continue;
            }
            out.push((act, t, u));
        }
    }
    out
}

/// Ordered key list of the ED decision vector (46 entries).
pub fn case_study_layout() -> Vec<ParamKey> {
    parameter_pairs()
        .into_iter()
        .flat_map(|(activity, tag, unit)| {
            [Role::Shape, Role::Scale].map(|role| ParamKey {
                activity,
                tag,
                unit,
                role,
            })
        })
        .collect()
}

/// One (shape, scale) pair as stored in parameter files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub activity: Activity,
    pub tag: Tag,
    pub unit: Unit,
    pub shape: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    keys: Vec<ParamKey>,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(keys: Vec<ParamKey>, values: Vec<f64>) -> Result<Self> {
        if keys.len() != values.len() {
            return Err(Error::Config(format!(
                "{} keys but {} values",
                keys.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::ParameterDomain(format!(
                "parameter values must be positive, got {v}"
            )));
        }
        Ok(ParamVector { keys, values })
    }

    /// Case-study layout filled from `(activity, tag, unit) -> (shape, scale)`.
    pub fn from_entries(entries: &[ParamEntry]) -> Result<Self> {
        let keys = case_study_layout();
        let mut values = Vec::with_capacity(keys.len());
        for k in &keys {
            let e = entries
                .iter()
                .find(|e| (e.activity, e.tag, e.unit) == (k.activity, k.tag, k.unit))
                .ok_or_else(|| {
                    Error::Config(format!(
                        "missing parameters for {} {}/{}",
                        k.activity.name(),
                        k.tag,
                        k.unit
                    ))
                })?;
            values.push(match k.role {
                Role::Shape => e.shape,
                Role::Scale => e.scale,
            });
        }
        for e in entries {
            if !keys
                .iter()
                .any(|k| (k.activity, k.tag, k.unit) == (e.activity, e.tag, e.unit))
            {
                return Err(Error::Config(format!(
                    "unexpected parameters for {} {}/{}",
                    e.activity.name(),
                    e.tag,
                    e.unit
                )));
            }
        }
        Self::new(keys, values)
    }

    pub fn to_entries(&self) -> Vec<ParamEntry> {
        self.keys
            .chunks(2)
            .zip(self.values.chunks(2))
            .map(|(k, v)| ParamEntry {
                activity: k[0].activity,
                tag: k[0].tag,
                unit: k[0].unit,
                shape: v[0],
                scale: v[1],
            })
            .collect()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let entries: Vec<ParamEntry> =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("parameter JSON: {e}")))?;
        Self::from_entries(&entries)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_entries()).expect("parameters serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    /// The bundled reference solution of the ED case study.
    pub fn reference() -> Self {
        Self::from_json(REFERENCE_PARAMS).expect("bundled parameters parse")
    }

    pub fn keys(&self) -> &[ParamKey] {
        &self.keys
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.keys.clone(), values)
    }

    pub fn get(&self, key: &ParamKey) -> Option<f64> {
        self.keys
            .iter()
            .position(|k| k == key)
            .map(|i| self.values[i])
    }

    pub fn weibull(&self, activity: Activity, tag: Tag, unit: Unit) -> Option<WeibullParams> {
        let idx = self.keys.iter().position(|k| {
            (k.activity, k.tag, k.unit, k.role) == (activity, tag, unit, Role::Shape)
        })?;
        let scale_key = self.keys.get(idx + 1)?;
        if scale_key.role != Role::Scale
            || (scale_key.activity, scale_key.tag, scale_key.unit) != (activity, tag, unit)
        {
            return None;
        }
        Some(WeibullParams {
            shape: self.values[idx],
            scale: self.values[idx + 1],
        })
    }
}

/// Lattice spacing per role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Granularity {
    pub delta_shape: f64,
    pub delta_scale: f64,
}

impl Default for Granularity {
    fn default() -> Self {
        Granularity {
            delta_shape: 1e-3,
            delta_scale: 1e-4,
        }
    }
}

impl Granularity {
    pub fn delta(&self, role: Role) -> f64 {
        match role {
            Role::Shape => self.delta_shape,
            Role::Scale => self.delta_scale,
        }
    }

    pub fn deltas(&self, keys: &[ParamKey]) -> Vec<f64> {
        keys.iter().map(|k| self.delta(k.role)).collect()
    }
}

/// Per-entry box bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Config("bound vectors differ in length".into()));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(*l > 0.0 && l < u) {
                return Err(Error::Config(format!("invalid bounds [{l}, {u}]")));
            }
        }
        Ok(Bounds { lower, upper })
    }

    /// Lower 0.01 everywhere; upper 1000 for shapes and 0.5 / 4 / 40 for
    /// triage / visit / exams scales.
    pub fn case_study(keys: &[ParamKey]) -> Self {
        let lower = vec![0.01; keys.len()];
        let upper = keys
            .iter()
            .map(|k| match (k.role, k.activity) {
                (Role::Shape, _) => 1000.0,
                (Role::Scale, Activity::Triage) => 0.5,
                (Role::Scale, Activity::Visit) => 4.0,
                (Role::Scale, Activity::Exams) => 40.0,
            })
            .collect();
        Bounds { lower, upper }
    }

    pub fn clamp(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| v.clamp(*l, *u))
            .collect()
    }
}

/// Values → integer multiples of `deltas`. Entries further than 1e-9 from the
/// lattice are rounded to the nearest point with a warning.
pub fn to_lattice(values: &[f64], deltas: &[f64]) -> Vec<i64> {
    values
        .iter()
        .zip(deltas)
        .map(|(v, d)| {
            let q = v / d;
            let r = q.round();
            if (q - r).abs() * d > 1e-9 {
                log::warn!("value {v} is not a multiple of {d}; rounded");
            }
            r as i64
        })
        .collect()
}

/// Lattice → values. Goes through the decimal representation of the
/// spacing so that e.g. 601 × 1e-3 yields exactly 0.601.
pub fn from_lattice(ints: &[i64], deltas: &[f64]) -> Vec<f64> {
    ints.iter()
        .zip(deltas)
        .map(|(i, d)| lattice_value(*i, *d))
        .collect()
}

fn lattice_value(i: i64, delta: f64) -> f64 {
    let inv = (1.0 / delta).round();
    if (inv * delta - 1.0).abs() < 1e-12 {
        i as f64 / inv
    } else {
        i as f64 * delta
    }
}

pub fn round_to_lattice(v: f64, delta: f64) -> f64 {
    lattice_value((v / delta).round() as i64, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_has_46_entries() {
        let keys = case_study_layout();
        assert_eq!(keys.len(), 46);
        let triage = keys
            .iter()
            .filter(|k| k.activity == Activity::Triage)
            .count();
        let visit = keys
            .iter()
            .filter(|k| k.activity == Activity::Visit)
            .count();
        let exams = keys
            .iter()
            .filter(|k| k.activity == Activity::Exams)
            .count();
        assert_eq!((triage, visit, exams), (14, 16, 16));
    }

    #[test]
    fn reference_vector_lookup() {
        let p = ParamVector::reference();
        assert_eq!(p.len(), 46);
        let w = p.weibull(Activity::Triage, Tag::Green, Unit::SU).unwrap();
        assert_eq!((w.shape, w.scale), (1000.0, 0.5));
        let w = p.weibull(Activity::Visit, Tag::Red, Unit::MU).unwrap();
        assert_eq!((w.shape, w.scale), (2.24, 0.36));
        assert!(p.weibull(Activity::Triage, Tag::Green, Unit::MIU).is_none());
        assert!(p.weibull(Activity::Visit, Tag::White, Unit::SU).is_none());
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(to_lattice(&[0.601], &[1e-3]), vec![601]);
        assert_eq!(to_lattice(&[0.4237], &[1e-4]), vec![4237]);
        assert_eq!(from_lattice(&[601], &[1e-3]), vec![0.601]);
        assert_eq!(from_lattice(&[4237], &[1e-4]), vec![0.4237]);
    }

    #[test]
    fn reference_vector_round_trips_through_lattice() {
        let p = ParamVector::reference();
        let deltas = Granularity::default().deltas(p.keys());
        let back = from_lattice(&to_lattice(p.values(), &deltas), &deltas);
        assert_eq!(back, p.values());
    }

    #[test]
    fn case_study_bounds() {
        let keys = case_study_layout();
        let b = Bounds::case_study(&keys);
        for (k, (l, u)) in keys.iter().zip(b.lower.iter().zip(&b.upper)) {
            assert_eq!(*l, 0.01);
            let expect = match (k.role, k.activity) {
                (Role::Shape, _) => 1000.0,
                (Role::Scale, Activity::Triage) => 0.5,
                (Role::Scale, Activity::Visit) => 4.0,
                (Role::Scale, Activity::Exams) => 40.0,
            };
            assert_eq!(*u, expect);
        }
        assert!(Bounds::new(vec![1.0], vec![0.5]).is_err());
    }

    #[test]
    fn entries_json_round_trip() {
        let p = ParamVector::reference();
        assert_eq!(ParamVector::from_json(&p.to_json()).unwrap(), p);
        let mut entries = p.to_entries();
        entries.pop();
        assert!(ParamVector::from_entries(&entries).is_err());
        let mut entries = p.to_entries();
        entries[0].shape = -1.0;
        assert!(ParamVector::from_entries(&entries).is_err());
    }
}
