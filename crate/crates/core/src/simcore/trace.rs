//! Event trace and the audit sweeps run over it.

use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Create,
    Enqueue,
    Grant,
    Release,
    CapacityChange,
    Remove,
    Discharge,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Create => "create",
            TraceKind::Enqueue => "enqueue",
            TraceKind::Grant => "grant",
            TraceKind::Release => "release",
            TraceKind::CapacityChange => "capacity",
            TraceKind::Remove => "remove",
            TraceKind::Discharge => "discharge",
        }
    }
}

/// One kernel event. `in_service` and `capacity` are the resource state
/// right after the event, when a resource is involved.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: TraceKind,
    pub entity: Option<u64>,
    pub resource: Option<&'static str>,
    pub priority: i32,
    pub in_service: u32,
    pub capacity: u32,
}

/// Tab-separated dump: time, type, entity, resource.
pub fn to_tsv(trace: &[TraceEvent]) -> String {
    let mut s = String::from("time\ttype\tentity\tresource\n");
    for e in trace {
        let entity = e.entity.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{:.6}\t{}\t{}\t{}",
            e.time,
            e.kind.as_str(),
            entity,
            e.resource.unwrap_or("")
        );
    }
    s
}

/// Every grant leaves `in_service <= capacity` at the grant instant.
pub fn audit_capacity(trace: &[TraceEvent]) -> Result<(), String> {
    for e in trace.iter().filter(|e| e.kind == TraceKind::Grant) {
        if e.in_service > e.capacity {
            return Err(format!(
                "t={} {}: in_service {} > capacity {}",
                e.time,
                e.resource.unwrap_or("?"),
                e.in_service,
                e.capacity
            ));
        }
    }
    Ok(())
}

/// Replays enqueues and grants per resource and checks that each granted
/// entity was the best co-waiting one under (priority desc, enqueue order asc).
pub fn audit_queue_discipline(trace: &[TraceEvent]) -> Result<(), String> {
    // resource -> entity -> (priority, enqueue order)
    let mut waiting: HashMap<&str, HashMap<u64, (i32, usize)>> = HashMap::new();
    for (idx, e) in trace.iter().enumerate() {
        let (Some(res), Some(entity)) = (e.resource, e.entity) else {
            continue;
        };
        match e.kind {
            TraceKind::Enqueue => {
                waiting
                    .entry(res)
                    .or_default()
                    .insert(entity, (e.priority, idx));
            }
            TraceKind::Grant => {
                let set = waiting.entry(res).or_default();
                match set.remove(&entity) {
                    Some((prio, order)) => {
                        if let Some((other, _)) = set
                            .iter()
                            .find(|(_, &(p, o))| p > prio || (p == prio && o < order))
                        {
                            return Err(format!(
                                "t={} {res}: granted {entity} ahead of {other}",
                                e.time
                            ));
                        }
                    }
                    None => {
                        if !set.is_empty() {
                            return Err(format!(
                                "t={} {res}: immediate grant to {entity} while {} wait",
                                e.time,
                                set.len()
                            ));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Prefix sums of a (time, ±1) log never go negative.
pub fn audit_census(log: &[(f64, i8)]) -> Result<(), String> {
    let mut level = 0i64;
    for &(t, d) in log {
        level += d as i64;
        if level < 0 {
            return Err(format!("census negative at t={t}"));
        }
    }
    Ok(())
}
