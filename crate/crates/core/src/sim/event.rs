//! Time-ordered event queue. Ties are popped in insertion order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// The device wants to send its next packet (deferred while busy).
    NextTransmission(u32),
    UplinkStart(u32),
    UplinkEnd {
        ed: u32,
        attempt: u64,
    },
    /// Receive window opens one `rx_delay_s` after the uplink ends.
    DownlinkStart(u32),
    DownlinkEnd(u32),
    WaypointArrival(u32),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time_s: f64,
    pub kind: EventKind,
}

#[derive(Debug)]
struct Scheduled {
    time_s: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // BinaryHeap is a max-heap; invert so the earliest event is on top.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time_s
            .total_cmp(&self.time_s)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Scheduled>,
    seq: u64,
    now: f64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn schedule(&mut self, time_s: f64, kind: EventKind) {
        assert!(
            time_s >= self.now,
            "event {kind:?} scheduled at {time_s} before now {}",
            self.now
        );
        self.heap.push(Scheduled {
            time_s,
            seq: self.seq,
            kind,
        });
        self.seq += 1;
    }

    pub fn pop(&mut self) -> Option<Event> {
        let s = self.heap.pop()?;
        self.now = s.time_s;
        Some(Event {
            time_s: s.time_s,
            kind: s.kind,
        })
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
