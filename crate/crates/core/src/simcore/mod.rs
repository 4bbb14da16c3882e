//! Discrete-event kernel: event calendar, resources whose capacity follows a
//! weekly schedule, priority/FIFO queues and the replication runner.

pub mod calendar;
pub mod replication;
pub mod resource;
pub mod trace;

pub use calendar::EventCalendar;
pub use replication::{
    run_replication, run_replication_with, run_replications, ReplicationOutput, ReplicationTally,
    RunOptions,
};
pub use resource::{CapacitySchedule, Grant, Resource, ScheduleEntry, SeizeOutcome, SurgeRule};
pub use trace::{TraceEvent, TraceKind};
