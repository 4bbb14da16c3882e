use std::cmp::Ordering;
use std::collections::BinaryHeap;

struct Pending<E> {
    time: f64,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Pending<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Pending<E> {}

impl<E> PartialOrd for Pending<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Pending<E> {
    // reversed: BinaryHeap is a max-heap and we want the earliest (time, seq) on top
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Future-event list. Events pop in nondecreasing time; ties pop in insertion order.
pub struct EventCalendar<E> {
    heap: BinaryHeap<Pending<E>>,
    next_seq: u64,
    now: f64,
}

impl<E> Default for EventCalendar<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventCalendar<E> {
    pub fn new() -> Self {
        EventCalendar {
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: 0.0,
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    /// Schedules `event` at `time`; times earlier than `now` are moved to `now`.
    pub fn schedule(&mut self, time: f64, event: E) -> u64 {
        debug_assert!(time.is_finite(), "non-finite event time");
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Pending {
            time: time.max(self.now),
            seq,
            event,
        });
        seq
    }

    pub fn pop(&mut self) -> Option<(f64, E)> {
        let p = self.heap.pop()?;
        self.now = p.time;
        Some((p.time, p.event))
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|p| p.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
