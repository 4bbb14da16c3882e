use std::cmp::Reverse;
use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::distributions::DayOfWeek;
use crate::error::{Error, Result};

/// Capacity `capacity` during `[from, to)` hours of each listed day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub from: u8,
    pub to: u8,
    pub days: Vec<DayOfWeek>,
    pub capacity: u32,
}

impl ScheduleEntry {
    pub fn every_day(from: u8, to: u8, capacity: u32) -> Self {
        ScheduleEntry {
            from,
            to,
            days: DayOfWeek::ALL.to_vec(),
            capacity,
        }
    }

    fn covers(&self, day: DayOfWeek, hour: u8) -> bool {
        self.from <= hour && hour < self.to && self.days.contains(&day)
    }
}

/// Capacity at `t` hours after midnight of `start_day` under `entries`.
pub fn scheduled_capacity(entries: &[ScheduleEntry], start_day: DayOfWeek, t: f64) -> u32 {
    let day = start_day.offset_by_hours(t);
    let hour = (t.floor() as i64).rem_euclid(24) as u8;
    entries
        .iter()
        .find(|e| e.covers(day, hour))
        .map_or(0, |e| e.capacity)
}

/// Weekly capacity schedule. The first entry covering an instant wins;
/// uncovered instants have capacity 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySchedule {
    pub start_day: DayOfWeek,
    pub entries: Vec<ScheduleEntry>,
}

impl CapacitySchedule {
    pub fn new(start_day: DayOfWeek, entries: Vec<ScheduleEntry>) -> Result<Self> {
        for e in &entries {
            if e.from >= e.to || e.to > 24 {
                return Err(Error::Config(format!(
                    "schedule entry [{}, {}) is not a valid hour range",
                    e.from, e.to
                )));
            }
        }
        Ok(CapacitySchedule { start_day, entries })
    }

    pub fn fixed(capacity: u32) -> Self {
        CapacitySchedule {
            start_day: DayOfWeek::Mon,
            entries: vec![ScheduleEntry::every_day(0, 24, capacity)],
        }
    }

    pub fn capacity_at(&self, t: f64) -> u32 {
        scheduled_capacity(&self.entries, self.start_day, t)
    }

    /// Whole hours in `(0, horizon)` at which the scheduled capacity changes.
    pub fn change_points(&self, horizon: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut prev = self.capacity_at(0.0);
        let mut h = 1.0;
        while h < horizon {
            let c = self.capacity_at(h);
            if c != prev {
                out.push(h);
                prev = c;
            }
            h += 1.0;
        }
        out
    }
}

/// Extra seats opened while the head of the queue has waited at least `threshold` hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurgeRule {
    pub threshold: f64,
    pub extra: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waiting {
    pub entity: u64,
    pub priority: i32,
    pub enqueued_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeizeOutcome {
    Granted,
    Enqueued,
}

/// A queued entity that has just been granted a seat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grant {
    pub entity: u64,
    pub priority: i32,
    pub enqueued_at: f64,
    pub granted_at: f64,
    /// Capacity in force when the grant was made.
    pub capacity: u32,
    /// Seats held right after the grant.
    pub in_service: u32,
}

impl Grant {
    pub fn waited(&self) -> f64 {
        self.granted_at - self.enqueued_at
    }
}

/// Seats with schedule-dependent capacity and a (priority desc, FIFO) queue.
///
/// Capacity decreases never preempt: holders finish normally and no grant
/// happens until `in_service < capacity(now)`.
#[derive(Debug, Clone)]
pub struct Resource {
    name: String,
    schedule: CapacitySchedule,
    surge: Option<SurgeRule>,
    in_service: u32,
    holders: HashSet<u64>,
    queue: BTreeMap<(Reverse<i32>, u64), Waiting>,
    waiting: HashSet<u64>,
    seq: u64,
}

impl Resource {
    pub fn new(name: impl Into<String>, schedule: CapacitySchedule) -> Self {
        Resource {
            name: name.into(),
            schedule,
            surge: None,
            in_service: 0,
            holders: HashSet::new(),
            queue: BTreeMap::new(),
            waiting: HashSet::new(),
            seq: 0,
        }
    }

    pub fn with_surge(mut self, rule: SurgeRule) -> Self {
        self.surge = Some(rule);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schedule(&self) -> &CapacitySchedule {
        &self.schedule
    }

    pub fn surge(&self) -> Option<SurgeRule> {
        self.surge
    }

    pub fn in_service(&self) -> u32 {
        self.in_service
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn head(&self) -> Option<&Waiting> {
        self.queue.values().next()
    }

    pub fn scheduled_capacity(&self, now: f64) -> u32 {
        self.schedule.capacity_at(now)
    }

    /// Scheduled capacity plus surge seats, if the surge rule is active.
    pub fn capacity(&self, now: f64) -> u32 {
        let base = self.schedule.capacity_at(now);
        match (self.surge, self.head()) {
            (Some(rule), Some(head))
                if base > 0 && now - head.enqueued_at >= rule.threshold - 1e-9 =>
            {
                base + rule.extra
            }
            _ => base,
        }
    }

    /// Grants at once iff nobody is waiting and a seat is free; otherwise
    /// enqueues. Callers follow an enqueue with `grant_waiting`.
    pub fn seize(&mut self, entity: u64, priority: i32, now: f64) -> Result<SeizeOutcome> {
        if self.waiting.contains(&entity) || self.holders.contains(&entity) {
            return Err(Error::Engine(format!(
                "entity {entity} already waiting on or holding {}",
                self.name
            )));
        }
        if self.queue.is_empty() && self.in_service < self.capacity(now) {
            self.in_service += 1;
            self.holders.insert(entity);
            return Ok(SeizeOutcome::Granted);
        }
        let key = (Reverse(priority), self.seq);
        self.seq += 1;
        self.queue.insert(
            key,
            Waiting {
                entity,
                priority,
                enqueued_at: now,
            },
        );
        self.waiting.insert(entity);
        Ok(SeizeOutcome::Enqueued)
    }

    pub fn release(&mut self, entity: u64, now: f64) -> Result<Vec<Grant>> {
        if !self.holders.remove(&entity) {
            return Err(Error::Engine(format!(
                "entity {entity} released {} without holding it",
                self.name
            )));
        }
        self.in_service -= 1;
        Ok(self.grant_waiting(now))
    }

    pub fn on_capacity_change(&mut self, now: f64) -> Vec<Grant> {
        self.grant_waiting(now)
    }

    fn free_capacity(&self, now: f64) -> Option<u32> {
        if self.queue.is_empty() {
            return None;
        }
        let c = self.capacity(now);
        (self.in_service < c).then_some(c)
    }

    /// Grants queue heads while `in_service < capacity(now)`.
    pub fn grant_waiting(&mut self, now: f64) -> Vec<Grant> {
        let mut out = Vec::new();
        while let Some(capacity) = self.free_capacity(now) {
            let (_, w) = self.queue.pop_first().expect("non-empty queue");
            self.waiting.remove(&w.entity);
            self.holders.insert(w.entity);
            self.in_service += 1;
            out.push(Grant {
                entity: w.entity,
                priority: w.priority,
                enqueued_at: w.enqueued_at,
                granted_at: now,
                capacity,
                in_service: self.in_service,
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day_night(day: u32, night: u32) -> CapacitySchedule {
        CapacitySchedule::new(
            DayOfWeek::Mon,
            vec![
                ScheduleEntry::every_day(0, 8, night),
                ScheduleEntry::every_day(8, 20, day),
                ScheduleEntry::every_day(20, 24, night),
            ],
        )
        .unwrap()
    }

    #[test]
    fn idle_seize_is_granted() {
        let mut r = Resource::new("r", CapacitySchedule::fixed(1));
        assert_eq!(r.seize(1, 0, 0.0).unwrap(), SeizeOutcome::Granted);
        assert_eq!(r.in_service(), 1);
    }

    #[test]
    fn priority_dominates() {
        let mut r = Resource::new("r", CapacitySchedule::fixed(1));
        r.seize(1, 0, 0.0).unwrap();
        assert_eq!(r.seize(2, 2, 5.0).unwrap(), SeizeOutcome::Enqueued);
        assert_eq!(r.seize(3, 3, 6.0).unwrap(), SeizeOutcome::Enqueued);
        let g = r.release(1, 7.0).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].entity, 3);
    }

    #[test]
    fn fifo_within_class() {
        let mut r = Resource::new("r", CapacitySchedule::fixed(1));
        r.seize(1, 0, 0.0).unwrap();
        r.seize(2, 2, 5.0).unwrap();
        r.seize(3, 2, 6.0).unwrap();
        let g = r.release(1, 7.0).unwrap();
        assert_eq!(g[0].entity, 2);
        assert_eq!(g[0].waited(), 2.0);
    }

    #[test]
    fn release_with_empty_queue() {
        let mut r = Resource::new("r", CapacitySchedule::fixed(1));
        r.seize(1, 0, 0.0).unwrap();
        assert!(r.release(1, 1.0).unwrap().is_empty());
        assert_eq!(r.in_service(), 0);
    }

    #[test]
    fn releasing_unheld_is_engine_error() {
        let mut r = Resource::new("r", CapacitySchedule::fixed(1));
        assert!(matches!(r.release(9, 0.0), Err(Error::Engine(_))));
        r.seize(1, 0, 0.0).unwrap();
        assert!(matches!(r.seize(1, 0, 0.0), Err(Error::Engine(_))));
    }

    #[test]
    fn night_capacity_drop_blocks_grants() {
        // MU: 3 by day, 2 by night
        let mut r = Resource::new("MU", day_night(3, 2));
        for e in 0..3 {
            assert_eq!(r.seize(e, 2, 19.0).unwrap(), SeizeOutcome::Granted);
        }
        r.seize(10, 2, 19.5).unwrap();
        assert!(r.on_capacity_change(20.0).is_empty());
        // release at 20:30 leaves 2 in service = night capacity
        assert!(r.release(0, 20.5).unwrap().is_empty());
        assert_eq!(r.in_service(), 2);
        let g = r.release(1, 21.0).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].entity, 10);
    }

    #[test]
    fn closed_on_sunday_until_monday_morning() {
        let miu = CapacitySchedule::new(
            DayOfWeek::Mon,
            vec![ScheduleEntry {
                from: 8,
                to: 20,
                days: DayOfWeek::ALL[..6].to_vec(),
                capacity: 2,
            }],
        )
        .unwrap();
        let sunday_noon = 6.0 * 24.0 + 12.0;
        let monday_8 = 7.0 * 24.0 + 8.0;
        assert_eq!(miu.capacity_at(sunday_noon), 0);
        let mut r = Resource::new("MIU", miu.clone());
        assert_eq!(r.seize(1, 1, sunday_noon).unwrap(), SeizeOutcome::Enqueued);
        assert!(miu.change_points(200.0).contains(&monday_8));
        let g = r.on_capacity_change(monday_8);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].granted_at, monday_8);
    }

    #[test]
    fn capacity_rise_grants_exactly_the_difference() {
        let mut r = Resource::new("r", day_night(2, 1));
        r.seize(1, 0, 7.0).unwrap();
        r.seize(2, 0, 7.1).unwrap();
        r.seize(3, 0, 7.2).unwrap();
        let g = r.on_capacity_change(8.0);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].entity, 2);
        assert_eq!(r.queue_len(), 1);
    }

    #[test]
    fn change_points_of_day_night() {
        let s = day_night(3, 2);
        assert_eq!(s.change_points(48.0), vec![8.0, 20.0, 32.0, 44.0]);
        assert!(CapacitySchedule::fixed(5).change_points(1000.0).is_empty());
    }

    #[test]
    fn surge_adds_capacity_after_threshold() {
        let mut r = Resource::new("r", CapacitySchedule::fixed(1)).with_surge(SurgeRule {
            threshold: 4.0,
            extra: 1,
        });
        r.seize(1, 0, 0.0).unwrap();
        r.seize(2, 0, 1.0).unwrap();
        assert!(r.grant_waiting(4.9).is_empty());
        let g = r.grant_waiting(5.0);
        assert_eq!(g.len(), 1);
        assert_eq!(r.in_service(), 2);
    }
}
