//! Scenario configuration: everything held fixed during calibration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{is_feasible, Seat, Tag, Unit};
use crate::distributions::{check_interval, check_weights, DayOfWeek, RateTable, WeibullParams};
use crate::error::{Error, Result};
use crate::simcore::resource::scheduled_capacity;
use crate::simcore::{CapacitySchedule, Resource, ScheduleEntry, SurgeRule};

const DEFAULT_SCENARIO: &str = include_str!("../../data/default_scenario.json");

/// Unit weights for one tag, by shift. `night` is used whenever MIU is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitWeights {
    pub day: BTreeMap<Unit, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub night: Option<BTreeMap<Unit, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub start_day: DayOfWeek,
    /// Simulated span, hours.
    pub horizon: f64,
    /// Discarded initial span, hours; whole days.
    pub warmup: f64,
    pub rate_table: RateTable,
    #[serde(default)]
    pub p_deceased: f64,
    pub tag_probs_day: BTreeMap<Tag, f64>,
    pub tag_probs_night: BTreeMap<Tag, f64>,
    /// Share of each tag routed to units outside the model (orthopedics);
    /// such patients leave right after tag assignment.
    #[serde(default)]
    pub p_out_of_scope: BTreeMap<Tag, f64>,
    pub unit_probs: BTreeMap<Tag, UnitWeights>,
    #[serde(default)]
    pub p_lwbs: BTreeMap<Tag, f64>,
    #[serde(default)]
    pub pre_queue_delay: BTreeMap<Tag, (f64, f64)>,
    #[serde(default)]
    pub p_removed_after_exams: BTreeMap<Tag, BTreeMap<Unit, f64>>,
    pub final_wait: BTreeMap<Tag, BTreeMap<Unit, WeibullParams>>,
    pub seats: BTreeMap<Seat, Vec<ScheduleEntry>>,
    #[serde(default)]
    pub surge_enabled: bool,
    #[serde(default = "default_surge_threshold")]
    pub surge_threshold: f64,
    #[serde(default = "default_surge_extra")]
    pub surge_extra_seats: u32,
}

fn default_surge_threshold() -> f64 {
    4.0
}

fn default_surge_extra() -> u32 {
    1
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

impl ScenarioConfig {
    /// The bundled ED scenario (seat tables, routing shares, final waits,
    /// synthetic weekly arrival profile).
    pub fn default_scenario() -> Self {
        serde_json::from_str(DEFAULT_SCENARIO).expect("bundled scenario parses")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("scenario JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn window_hours(&self) -> f64 {
        self.horizon - self.warmup
    }

    /// Day of week at the start of the statistics window.
    pub fn window_start_day(&self) -> DayOfWeek {
        self.start_day.offset_by_hours(self.warmup)
    }

    pub fn schedule(&self, seat: Seat) -> Result<CapacitySchedule> {
        let entries = self.seats.get(&seat).cloned().unwrap_or_default();
        CapacitySchedule::new(self.start_day, entries)
    }

    pub fn build_resource(&self, seat: Seat) -> Result<Resource> {
        let r = Resource::new(seat.name(), self.schedule(seat)?);
        if self.surge_enabled && matches!(seat, Seat::MU | Seat::SU) {
            Ok(r.with_surge(SurgeRule {
                threshold: self.surge_threshold,
                extra: self.surge_extra_seats,
            }))
        } else {
            Ok(r)
        }
    }

    /// MIU is open (and the day-shift routing applies) iff it has seats at `t`.
    pub fn miu_open(&self, t: f64) -> bool {
        self.seats.get(&Seat::MIU).map_or(false, |entries| {
            scheduled_capacity(entries, self.start_day, t) > 0
        })
    }

    pub fn tag_weights(&self, day: bool) -> [f64; 4] {
        let src = if day {
            &self.tag_probs_day
        } else {
            &self.tag_probs_night
        };
        let mut w = [0.0; 4];
        for (i, t) in Tag::ALL.iter().enumerate() {
            w[i] = src.get(t).copied().unwrap_or(0.0);
        }
        if !day {
            w[Tag::White as usize] = 0.0;
        }
        w
    }

    /// Weights over `tag.units()` for the given shift; MIU is excluded at night.
    pub fn unit_weights(&self, tag: Tag, day: bool) -> Vec<f64> {
        let Some(uw) = self.unit_probs.get(&tag) else {
            return vec![0.0; tag.units().len()];
        };
        let src = if day {
            &uw.day
        } else {
            uw.night.as_ref().unwrap_or(&uw.day)
        };
        tag.units()
            .iter()
            .map(|u| {
                if !day && *u == Unit::MIU {
                    0.0
                } else {
                    src.get(u).copied().unwrap_or(0.0)
                }
            })
            .collect()
    }

    pub fn final_wait_for(&self, tag: Tag, unit: Unit) -> Option<WeibullParams> {
        self.final_wait
            .get(&tag)
            .and_then(|m| m.get(&unit))
            .copied()
    }

    pub fn p_removed(&self, tag: Tag, unit: Unit) -> f64 {
        self.p_removed_after_exams
            .get(&tag)
            .and_then(|m| m.get(&unit))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn pre_queue(&self, tag: Tag) -> (f64, f64) {
        self.pre_queue_delay
            .get(&tag)
            .copied()
            .unwrap_or((0.0, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!(
                "horizon {} must be positive",
                self.horizon
            )));
        }
        if !(self.warmup >= 0.0 && self.warmup < self.horizon) {
            return Err(Error::Config(format!(
                "warm-up {} must lie in [0, horizon)",
                self.warmup
            )));
        }
        if self.warmup % 24.0 != 0.0 {
            return Err(Error::Config(
                "warm-up must be a whole number of days".into(),
            ));
        }
        check_prob("p_deceased", self.p_deceased)?;
        let day_w = self.tag_weights(true);
        check_weights(&day_w).map_err(|e| Error::Config(format!("tag_probs_day: {e}")))?;
        let night_w = self.tag_weights(false);
        check_weights(&night_w).map_err(|e| Error::Config(format!("tag_probs_night: {e}")))?;
        if self
            .tag_probs_night
            .get(&Tag::White)
            .copied()
            .unwrap_or(0.0)
            > 0.0
        {
            return Err(Error::Config("White cannot be assigned at night".into()));
        }
        for (tag, p) in &self.p_out_of_scope {
            check_prob(&format!("p_out_of_scope[{tag}]"), *p)?;
        }
        for (tag, p) in &self.p_lwbs {
            check_prob(&format!("p_lwbs[{tag}]"), *p)?;
        }
        for (tag, (lo, hi)) in &self.pre_queue_delay {
            check_interval(*lo, *hi)
                .map_err(|e| Error::Config(format!("pre_queue_delay[{tag}]: {e}")))?;
        }
        for (tag, m) in &self.p_removed_after_exams {
            for (unit, p) in m {
                check_prob(&format!("p_removed_after_exams[{tag}][{unit}]"), *p)?;
            }
        }
        for tag in Tag::ALL {
            let can_day = day_w[tag as usize] > 0.0;
            let can_night = night_w[tag as usize] > 0.0;
            if let Some(uw) = self.unit_probs.get(&tag) {
                let all_units = uw.day.keys().chain(uw.night.iter().flat_map(|m| m.keys()));
                for u in all_units {
                    if !is_feasible(tag, *u) {
                        return Err(Error::Config(format!(
                            "unit_probs[{tag}] lists infeasible unit {u}"
                        )));
                    }
                }
            }
            if can_day {
                check_weights(&self.unit_weights(tag, true))
                    .map_err(|e| Error::Config(format!("unit_probs[{tag}].day: {e}")))?;
            }
            if can_night {
                check_weights(&self.unit_weights(tag, false))
                    .map_err(|e| Error::Config(format!("unit_probs[{tag}].night: {e}")))?;
            }
            for &u in tag.units() {
                match self.final_wait_for(tag, u) {
                    Some(w) => w
                        .validate()
                        .map_err(|e| Error::Config(format!("final_wait[{tag}][{u}]: {e}")))?,
                    None => {
                        return Err(Error::Config(format!("final_wait[{tag}][{u}] missing")));
                    }
                }
            }
        }
        for seat in Seat::ALL {
            self.schedule(seat)?;
        }
        if self.surge_enabled && !(self.surge_threshold >= 0.0) {
            return Err(Error::Config("surge_threshold must be nonnegative".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_is_valid() {
        let cfg = ScenarioConfig::default_scenario();
        cfg.validate().unwrap();
        assert_eq!(cfg.horizon, 38.0 * 24.0);
        assert_eq!(cfg.warmup, 7.0 * 24.0);
        assert_eq!(cfg.start_day, DayOfWeek::Mon);
        // January arrivals: 5 Mon/Tue/Wed + 4 of every other day ≈ 4192
        let rows = cfg.rate_table.rows();
        let jan: f64 = rows
            .iter()
            .enumerate()
            .map(|(d, r)| r.iter().sum::<f64>() * if d < 3 { 5.0 } else { 4.0 })
            .sum();
        assert!((jan - 4192.0).abs() < 5.0, "{jan}");
    }

    #[test]
    fn seat_tables() {
        let cfg = ScenarioConfig::default_scenario();
        let mu = cfg.schedule(Seat::MU).unwrap();
        let su = cfg.schedule(Seat::SU).unwrap();
        let miu = cfg.schedule(Seat::MIU).unwrap();
        let red = cfg.schedule(Seat::Red).unwrap();
        // Monday 10:00 and 22:00
        assert_eq!((mu.capacity_at(10.0), mu.capacity_at(22.0)), (3, 2));
        assert_eq!((su.capacity_at(10.0), su.capacity_at(22.0)), (2, 1));
        assert_eq!((miu.capacity_at(10.0), miu.capacity_at(22.0)), (2, 0));
        assert_eq!(miu.capacity_at(6.0 * 24.0 + 10.0), 0);
        assert_eq!(red.capacity_at(3.0), 5);
        assert!(cfg.miu_open(10.0));
        assert!(!cfg.miu_open(6.0 * 24.0 + 10.0));
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let cfg = ScenarioConfig::default_scenario();
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);

        let mut bad = cfg.clone();
        bad.p_deceased = 1.5;
        assert!(matches!(bad.validate(), Err(Error::Config(_))));

        let mut bad = cfg.clone();
        bad.final_wait.get_mut(&Tag::Red).unwrap().remove(&Unit::RA);
        assert!(bad.validate().is_err());

        let mut bad = cfg.clone();
        bad.tag_probs_night.insert(Tag::White, 1.0);
        assert!(bad.validate().is_err());

        let mut bad = cfg;
        bad.warmup = 10.0;
        assert!(bad.validate().is_err());

        assert!(ScenarioConfig::from_json("{\"start_day\": 3}").is_err());
    }

    #[test]
    fn night_weights_exclude_white_and_miu() {
        let cfg = ScenarioConfig::default_scenario();
        assert_eq!(cfg.tag_weights(false)[0], 0.0);
        let g_night = cfg.unit_weights(Tag::Green, false);
        assert_eq!(g_night[2], 0.0);
        assert!(g_night[0] > 0.0 && g_night[1] > 0.0);
    }
}
