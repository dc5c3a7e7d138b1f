use std::cmp::Ordering;

/// A request travelling through the control plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InFlight {
    pub id: u64,
    pub switch: usize,
    pub controller: usize,
    pub generated_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    ArriveAtController(InFlight),
    ResponseAtSwitch(InFlight),
    ServiceComplete { controller: usize },
    StatusReport,
    ReportDelivered { switch: usize, controller: usize, u: f64 },
}

impl EventKind {
    /// Arrivals, then completions, then reports.
    fn rank(&self) -> u8 {
        match self {
            EventKind::ArriveAtController(_) => 0,
            EventKind::ResponseAtSwitch(_) => 1,
            EventKind::ServiceComplete { .. } => 2,
            EventKind::StatusReport => 3,
            EventKind::ReportDelivered { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Event {
    fn key(&self) -> (f64, u8, u64) {
        (self.time, self.kind.rank(), self.seq)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reversed so that `BinaryHeap` pops the earliest event first.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ta, ka, sa) = self.key();
        let (tb, kb, sb) = other.key();
        tb.total_cmp(&ta).then(kb.cmp(&ka)).then(sb.cmp(&sa))
    }
}
