use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Triage color tag. Ordered by urgency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    #[serde(rename = "W")]
    White,
    #[serde(rename = "G")]
    Green,
    #[serde(rename = "Y")]
    Yellow,
    #[serde(rename = "R")]
    Red,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::White, Tag::Green, Tag::Yellow, Tag::Red];

    /// Queue priority: Red=3, Yellow=2, Green=1, White=0.
    pub fn priority(self) -> i32 {
        self as i32
    }

    pub fn code(self) -> &'static str {
        match self {
            Tag::White => "W",
            Tag::Green => "G",
            Tag::Yellow => "Y",
            Tag::Red => "R",
        }
    }

    /// Units this tag may be visited in.
    pub fn units(self) -> &'static [Unit] {
        match self {
            Tag::White => &[Unit::MIU],
            Tag::Green => &[Unit::MU, Unit::SU, Unit::MIU],
            Tag::Yellow => &[Unit::MU, Unit::SU],
            Tag::Red => &[Unit::MU, Unit::SU, Unit::RA],
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "W" => Ok(Tag::White),
            "G" => Ok(Tag::Green),
            "Y" => Ok(Tag::Yellow),
            "R" => Ok(Tag::Red),
            other => Err(Error::DataValidation(format!("unknown tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Unit {
    MU,
    SU,
    RA,
    MIU,
}

impl Unit {
    pub const ALL: [Unit; 4] = [Unit::MU, Unit::SU, Unit::RA, Unit::MIU];

    pub fn code(self) -> &'static str {
        match self {
            Unit::MU => "MU",
            Unit::SU => "SU",
            Unit::RA => "RA",
            Unit::MIU => "MIU",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MU" => Ok(Unit::MU),
            "SU" => Ok(Unit::SU),
            "RA" => Ok(Unit::RA),
            "MIU" => Ok(Unit::MIU),
            other => Err(Error::DataValidation(format!("unknown unit {other:?}"))),
        }
    }
}

pub fn is_feasible(tag: Tag, unit: Unit) -> bool {
    tag.units().contains(&unit)
}

/// All feasible (tag, unit) pairs, Red/RA included.
pub fn feasible_pairs() -> Vec<(Tag, Unit)> {
    Tag::ALL
        .iter()
        .flat_map(|&t| t.units().iter().map(move |&u| (t, u)))
        .collect()
}

/// The (tag, unit) pairs whose visit and exams parameters are calibrated.
/// Red/RA shares the Red/MU service parameters and is not a calibration cell.
pub fn decision_pairs() -> Vec<(Tag, Unit)> {
    feasible_pairs()
        .into_iter()
        .filter(|&p| p != (Tag::Red, Unit::RA))
        .collect()
}

/// Seat pools. Red patients use a dedicated pool disjoint from MU/SU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Seat {
    MU,
    SU,
    MIU,
    #[serde(rename = "RED")]
    Red,
}

impl Seat {
    pub const ALL: [Seat; 4] = [Seat::MU, Seat::SU, Seat::MIU, Seat::Red];

    pub fn for_patient(tag: Tag, unit: Unit) -> Seat {
        match (tag, unit) {
            (Tag::Red, _) => Seat::Red,
            (_, Unit::MU) => Seat::MU,
            (_, Unit::SU) => Seat::SU,
            (_, Unit::MIU) => Seat::MIU,
            (_, Unit::RA) => Seat::Red,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Seat::MU => "MU",
            Seat::SU => "SU",
            Seat::MIU => "MIU",
            Seat::Red => "RED",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activity {
    Triage,
    Visit,
    Exams,
}

impl Activity {
    pub const ALL: [Activity; 3] = [Activity::Triage, Activity::Visit, Activity::Exams];

    pub fn name(self) -> &'static str {
        match self {
            Activity::Triage => "triage",
            Activity::Visit => "visit",
            Activity::Exams => "exams",
        }
    }
}

/// Time differences compared between simulated and observed data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kpi {
    /// Door-to-doctor: t2 − t0.
    DOT,
    /// Doctor-to-discharge: t6 − t2 (t5 − t2 on real data when t5 is known).
    DIT,
}

impl Kpi {
    pub const ALL: [Kpi; 2] = [Kpi::DOT, Kpi::DIT];

    pub fn name(self) -> &'static str {
        match self {
            Kpi::DOT => "DOT",
            Kpi::DIT => "DIT",
        }
    }
}

impl FromStr for Kpi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "DOT" => Ok(Kpi::DOT),
            "DIT" => Ok(Kpi::DIT),
            other => Err(Error::DataValidation(format!("unknown KPI {other:?}"))),
        }
    }
}

/// (tag, unit, time difference) index of the calibration problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub tag: Tag,
    pub unit: Unit,
    pub kpi: Kpi,
}

impl CellKey {
    pub fn new(tag: Tag, unit: Unit, kpi: Kpi) -> Self {
        CellKey { tag, unit, kpi }
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.tag, self.unit, self.kpi.name())
    }
}

/// The calibration index set: decision pairs × {DOT, DIT}.
pub fn calibration_cells() -> Vec<CellKey> {
    decision_pairs()
        .into_iter()
        .flat_map(|(t, u)| Kpi::ALL.iter().map(move |&k| CellKey::new(t, u, k)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Discharged,
    Lwbs,
    Deceased,
    LeftDuringExams,
    Transferred,
    InSystem,
}

impl Outcome {
    pub fn code(self) -> &'static str {
        match self {
            Outcome::Discharged => "discharged",
            Outcome::Lwbs => "lwbs",
            Outcome::Deceased => "deceased",
            Outcome::LeftDuringExams => "left_during_exams",
            Outcome::Transferred => "transferred",
            Outcome::InSystem => "in_system",
        }
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discharged" => Ok(Outcome::Discharged),
            "lwbs" => Ok(Outcome::Lwbs),
            "deceased" => Ok(Outcome::Deceased),
            "left_during_exams" => Ok(Outcome::LeftDuringExams),
            "transferred" => Ok(Outcome::Transferred),
            "in_system" => Ok(Outcome::InSystem),
            other => Err(Error::DataValidation(format!("unknown outcome {other:?}"))),
        }
    }
}

/// One patient's recorded timestamps, in hours from the start of the observed period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: u64,
    pub tag: Tag,
    pub unit: Unit,
    /// Triage start.
    pub t0: f64,
    /// Visit start.
    pub t2: Option<f64>,
    /// Last medical report.
    pub t5: Option<f64>,
    /// Discharge.
    pub t6: Option<f64>,
    pub outcome: Outcome,
}

impl PatientRecord {
    pub fn validate(&self) -> Result<()> {
        if !is_feasible(self.tag, self.unit) {
            return Err(Error::DataValidation(format!(
                "record {}: infeasible assignment {}/{}",
                self.id, self.tag, self.unit
            )));
        }
        let bad = |what: &str| Err(Error::DataValidation(format!("record {}: {what}", self.id)));
        if let Some(t2) = self.t2 {
            if t2 < self.t0 {
                return bad("t2 < t0");
            }
            if let Some(t6) = self.t6 {
                if t6 < t2 {
                    return bad("t6 < t2");
                }
            }
            if let Some(t5) = self.t5 {
                if t5 < t2 {
                    return bad("t5 < t2");
                }
            }
        }
        if let (Some(t5), Some(t6)) = (self.t5, self.t6) {
            if t5 > t6 {
                return bad("t5 > t6");
            }
        }
        if self.outcome == Outcome::Discharged && (self.t2.is_none() || self.t6.is_none()) {
            return bad("discharged record without t2/t6");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasibility_matrix() {
        assert!(is_feasible(Tag::White, Unit::MIU));
        assert!(!is_feasible(Tag::White, Unit::SU));
        assert!(!is_feasible(Tag::Yellow, Unit::MIU));
        assert!(is_feasible(Tag::Red, Unit::RA));
        assert_eq!(feasible_pairs().len(), 9);
        assert_eq!(decision_pairs().len(), 8);
        assert_eq!(calibration_cells().len(), 16);
    }

    #[test]
    fn priorities() {
        assert_eq!(Tag::Red.priority(), 3);
        assert_eq!(Tag::Yellow.priority(), 2);
        assert_eq!(Tag::Green.priority(), 1);
        assert_eq!(Tag::White.priority(), 0);
    }

    #[test]
    fn red_uses_dedicated_pool() {
        for u in Tag::Red.units() {
            assert_eq!(Seat::for_patient(Tag::Red, *u), Seat::Red);
        }
        assert_eq!(Seat::for_patient(Tag::Yellow, Unit::MU), Seat::MU);
        assert_eq!(Seat::for_patient(Tag::Green, Unit::MIU), Seat::MIU);
    }
}
