//! Patient trajectory through the ED: triage delay, visit queue, exams,
//! final wait, with the removal branches in between.

use std::collections::BTreeMap;

use super::config::ScenarioConfig;
use super::routing::{assign_with, service_params, PatientDraws};
use super::types::{feasible_pairs, Activity, Outcome, PatientRecord, Seat, Tag, Unit};
use crate::distributions::WeibullParams;
use crate::error::{Error, Result};
use crate::optimizer::params::ParamVector;
use crate::simcore::ReplicationTally;
use crate::simcore::{EventCalendar, Grant, Resource, SeizeOutcome, TraceEvent, TraceKind};

#[derive(Debug, Clone, Copy)]
enum Ev {
    Arrival(usize),
    TriageEnd(usize),
    JoinQueue(usize),
    VisitEnd(usize),
    ExamsEnd(usize),
    Discharge(usize),
    Capacity(Seat),
    Surge(Seat),
}

#[derive(Debug, Clone)]
struct Patient {
    arrival: f64,
    draws: PatientDraws,
    tag: Tag,
    unit: Unit,
    t2: Option<f64>,
    t6: Option<f64>,
    outcome: Option<Outcome>,
    diverted: bool,
}

/// Result of one simulated run, before window filtering.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryOutput {
    /// Window patients, times relative to the window start.
    pub records: Vec<PatientRecord>,
    /// In-treatment census changes of window patients, window-relative.
    pub census_log: BTreeMap<(Tag, Unit), Vec<(f64, i8)>>,
    /// Counts over the whole run.
    pub tally: ReplicationTally,
    pub trace: Option<Vec<TraceEvent>>,
}

/// Checks that every feasible patient type has parameters for every activity.
pub fn check_params(params: &ParamVector) -> Result<()> {
    for (tag, unit) in feasible_pairs() {
        for act in Activity::ALL {
            for coin in [0.0, 0.9] {
                service_params(params, act, tag, unit, coin)?.validate()?;
            }
        }
    }
    Ok(())
}

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    params: &'a ParamVector,
    cal: EventCalendar<Ev>,
    resources: Vec<Resource>,
    patients: Vec<Patient>,
    census: Vec<(usize, f64, i8)>,
    tally: ReplicationTally,
    trace: Option<Vec<TraceEvent>>,
}

impl<'a> Engine<'a> {
    fn service(&self, act: Activity, i: usize, u: f64) -> Result<f64> {
        let p = &self.patients[i];
        let w: WeibullParams =
            service_params(self.params, act, p.tag, p.unit, p.draws.triage_coin)?;
        Ok(w.quantile_of_survival(u))
    }

    fn log(
        &mut self,
        time: f64,
        kind: TraceKind,
        entity: Option<usize>,
        seat: Option<Seat>,
        state: Option<(u32, u32)>,
    ) {
        let Some(trace) = self.trace.as_mut() else {
            return;
        };
        let (in_service, capacity) = match seat {
            Some(s) => {
                let r = &self.resources[s.index()];
                state.unwrap_or_else(|| (r.in_service(), r.capacity(time)))
            }
            None => (0, 0),
        };
        trace.push(TraceEvent {
            time,
            kind,
            entity: entity.map(|e| e as u64),
            resource: seat.map(Seat::name),
            priority: entity.map_or(0, |e| self.patients[e].tag.priority()),
            in_service,
            capacity,
        });
    }

    /// `state` is (in_service, capacity) right after the grant.
    fn start_visit(&mut self, i: usize, now: f64, seat: Seat, state: (u32, u32)) -> Result<()> {
        self.patients[i].t2 = Some(now);
        self.log(now, TraceKind::Grant, Some(i), Some(seat), Some(state));
        self.census.push((i, now, 1));
        let d = self.service(Activity::Visit, i, self.patients[i].draws.visit)?;
        self.cal.schedule(now + d, Ev::VisitEnd(i));
        Ok(())
    }

    fn apply_grants(&mut self, grants: Vec<Grant>, seat: Seat, now: f64) -> Result<()> {
        for g in grants {
            self.start_visit(g.entity as usize, now, seat, (g.in_service, g.capacity))?;
        }
        Ok(())
    }

    fn finish(&mut self, i: usize, outcome: Outcome) {
        self.patients[i].outcome = Some(outcome);
        let t = &mut self.tally;
        match outcome {
            Outcome::Discharged => t.discharged += 1,
            Outcome::Lwbs => t.lwbs += 1,
            Outcome::Deceased => t.deceased += 1,
            Outcome::LeftDuringExams => t.left_during_exams += 1,
            Outcome::Transferred => t.transferred += 1,
            Outcome::InSystem => t.in_system += 1,
        }
    }

    fn handle(&mut self, now: f64, ev: Ev) -> Result<()> {
        let cfg = self.cfg;
        match ev {
            Ev::Arrival(i) => {
                self.tally.created += 1;
                self.log(now, TraceKind::Create, Some(i), None, None);
                let d = self.patients[i].draws;
                let (tag, unit) = assign_with(now, cfg, d.tag, d.unit);
                let p = &mut self.patients[i];
                p.tag = tag;
                p.unit = unit;
                if d.deceased < cfg.p_deceased {
                    self.finish(i, Outcome::Deceased);
                    self.log(now, TraceKind::Remove, Some(i), None, None);
                    return Ok(());
                }
                let p_oos = cfg.p_out_of_scope.get(&tag).copied().unwrap_or(0.0);
                if d.out_of_scope < p_oos {
                    self.patients[i].diverted = true;
                    self.tally.diverted += 1;
                    self.log(now, TraceKind::Remove, Some(i), None, None);
                    return Ok(());
                }
                let dur = self.service(Activity::Triage, i, d.triage)?;
                self.cal.schedule(now + dur, Ev::TriageEnd(i));
            }
            Ev::TriageEnd(i) => {
                let p = &self.patients[i];
                let p_lwbs = cfg.p_lwbs.get(&p.tag).copied().unwrap_or(0.0);
                if p.draws.lwbs < p_lwbs {
                    self.finish(i, Outcome::Lwbs);
                    self.log(now, TraceKind::Remove, Some(i), None, None);
                    return Ok(());
                }
                let (lo, hi) = cfg.pre_queue(p.tag);
                let delay = lo + (hi - lo) * p.draws.pre_queue;
                self.cal.schedule(now + delay, Ev::JoinQueue(i));
            }
            Ev::JoinQueue(i) => {
                let p = &self.patients[i];
                let seat = Seat::for_patient(p.tag, p.unit);
                let prio = p.tag.priority();
                let r = &mut self.resources[seat.index()];
                match r.seize(i as u64, prio, now)? {
                    SeizeOutcome::Granted => {
                        let state = (r.in_service(), r.capacity(now));
                        self.start_visit(i, now, seat, state)?;
                    }
                    SeizeOutcome::Enqueued => {
                        let surge = r.surge();
                        self.log(now, TraceKind::Enqueue, Some(i), Some(seat), None);
                        if let Some(rule) = surge {
                            self.cal.schedule(now + rule.threshold, Ev::Surge(seat));
                        }
                        let grants = self.resources[seat.index()].grant_waiting(now);
                        self.apply_grants(grants, seat, now)?;
                    }
                }
            }
            Ev::VisitEnd(i) => {
                let p = &self.patients[i];
                let seat = Seat::for_patient(p.tag, p.unit);
                let grants = self.resources[seat.index()].release(i as u64, now)?;
                self.log(now, TraceKind::Release, Some(i), Some(seat), None);
                self.apply_grants(grants, seat, now)?;
                let d = self.service(Activity::Exams, i, self.patients[i].draws.exams)?;
                self.cal.schedule(now + d, Ev::ExamsEnd(i));
            }
            Ev::ExamsEnd(i) => {
                let p = &self.patients[i];
                if p.draws.removed < cfg.p_removed(p.tag, p.unit) {
                    self.finish(i, Outcome::LeftDuringExams);
                    self.census.push((i, now, -1));
                    self.log(now, TraceKind::Remove, Some(i), None, None);
                    return Ok(());
                }
                let w = cfg.final_wait_for(p.tag, p.unit).ok_or_else(|| {
                    Error::Config(format!("no final wait for {}/{}", p.tag, p.unit))
                })?;
                let d = w.quantile_of_survival(p.draws.final_wait);
                self.cal.schedule(now + d, Ev::Discharge(i));
            }
            Ev::Discharge(i) => {
                self.patients[i].t6 = Some(now);
                self.finish(i, Outcome::Discharged);
                self.census.push((i, now, -1));
                self.log(now, TraceKind::Discharge, Some(i), None, None);
            }
            Ev::Capacity(seat) => {
                let grants = self.resources[seat.index()].on_capacity_change(now);
                self.log(now, TraceKind::CapacityChange, None, Some(seat), None);
                self.apply_grants(grants, seat, now)?;
            }
            Ev::Surge(seat) => {
                let grants = self.resources[seat.index()].grant_waiting(now);
                self.apply_grants(grants, seat, now)?;
            }
        }
        Ok(())
    }
}

/// Runs the ED over `[0, cfg.horizon)` for the given arrivals and their
/// pre-drawn uniforms. Patients still in the system at the horizon are
/// truncated with outcome `InSystem`.
pub fn simulate(
    cfg: &ScenarioConfig,
    params: &ParamVector,
    arrivals: &[(f64, PatientDraws)],
    trace: bool,
) -> Result<TrajectoryOutput> {
    cfg.validate()?;
    check_params(params)?;
    let mut resources = Vec::with_capacity(Seat::ALL.len());
    for seat in Seat::ALL {
        resources.push(cfg.build_resource(seat)?);
    }
    let mut cal = EventCalendar::new();
    for seat in Seat::ALL {
        for t in resources[seat.index()]
            .schedule()
            .change_points(cfg.horizon)
        {
            cal.schedule(t, Ev::Capacity(seat));
        }
    }
    let mut patients = Vec::with_capacity(arrivals.len());
    for (i, &(t, draws)) in arrivals.iter().enumerate() {
        if !(t >= 0.0 && t < cfg.horizon) {
            return Err(Error::Engine(format!("arrival {t} outside [0, horizon)")));
        }
        patients.push(Patient {
            arrival: t,
            draws,
            tag: Tag::Green,
            unit: Unit::SU,
            t2: None,
            t6: None,
            outcome: None,
            diverted: false,
        });
        cal.schedule(t, Ev::Arrival(i));
    }

    let mut eng = Engine {
        cfg,
        params,
        cal,
        resources,
        patients,
        census: Vec::new(),
        tally: ReplicationTally::default(),
        trace: trace.then(Vec::new),
    };
    while let Some(t) = eng.cal.peek_time() {
        if t >= cfg.horizon {
            break;
        }
        let (now, ev) = eng.cal.pop().expect("peeked event");
        eng.handle(now, ev)?;
    }
    for i in 0..eng.patients.len() {
        let p = &eng.patients[i];
        if p.outcome.is_none() && !p.diverted {
            eng.finish(i, Outcome::InSystem);
        }
    }

    let w0 = cfg.warmup;
    let in_window = |p: &Patient| p.arrival >= w0 && !p.diverted;
    let records = eng
        .patients
        .iter()
        .enumerate()
        .filter(|(_, p)| in_window(p))
        .map(|(i, p)| PatientRecord {
            id: i as u64,
            tag: p.tag,
            unit: p.unit,
            t0: p.arrival - w0,
            t2: p.t2.map(|t| t - w0),
            t5: None,
            t6: p.t6.map(|t| t - w0),
            outcome: p.outcome.expect("every patient has an outcome"),
        })
        .collect();
    let mut census_log: BTreeMap<(Tag, Unit), Vec<(f64, i8)>> = BTreeMap::new();
    for &(i, t, d) in &eng.census {
        let p = &eng.patients[i];
        if in_window(p) {
            census_log
                .entry((p.tag, p.unit))
                .or_default()
                .push((t - w0, d));
        }
    }
    Ok(TrajectoryOutput {
        records,
        census_log,
        tally: eng.tally,
        trace: eng.trace,
    })
}
