use std::fmt;

/// Hardware unit a trace interval belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Unit {
    Pe(u32),
    Arbiter,
    GlobalBuffer,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Pe(i) => write!(f, "PE{i}"),
            Unit::Arbiter => write!(f, "ARB"),
            Unit::GlobalBuffer => write!(f, "GB"),
        }
    }
}

/// Pipeline phase of a trace interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Compute,
    Aggregate,
    Broadcast,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Compute => "compute",
            Phase::Aggregate => "aggregate",
            Phase::Broadcast => "broadcast",
        };
        f.write_str(s)
    }
}

/// Half-open busy interval `[start, end)` of one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub start: u64,
    pub end: u64,
    pub unit: Unit,
    pub phase: Phase,
}

/// Line-oriented dump: `cycle_start cycle_end unit phase` per event.
pub fn format_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&format!("{} {} {} {}\n", e.start, e.end, e.unit, e.phase));
    }
    out
}
