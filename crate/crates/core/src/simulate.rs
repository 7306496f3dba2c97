//! Cycle-by-cycle oracle for two co-resident instructions.
//!
//! The oracle steps both instructions through the pipeline and evaluates the
//! interval semantics directly on each cycle: it knows nothing of the
//! closed-form rules in [`crate::enumerate`]. Stall counts are found by
//! replaying with increasing stalls until the hazard clears.

use std::collections::BTreeMap;
use std::fmt;

use crate::isa::{InstructionSet, InstructionSpec, Stage, StagePair};
use crate::record::{canonicalize, HazardRecord, HazardType, OperandRef, Resolution};

/// Which operands are taken to name the same datum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binding {
    pub kind: HazardType,
    pub older_operand: String,
    pub newer_operand: String,
}

impl Binding {
    pub fn new(kind: HazardType, older: impl Into<String>, newer: impl Into<String>) -> Self {
        Binding {
            kind,
            older_operand: older.into(),
            newer_operand: newer.into(),
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}",
            self.kind, self.older_operand, self.newer_operand
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    NotEntered,
    Stage(Stage),
    Retired,
}

impl Position {
    pub fn stage(self) -> Option<Stage> {
        match self {
            Position::Stage(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    RawStallNeeded,
    RawForwardPossible,
    WarViolation,
    WawViolation,
}

impl EventKind {
    /// Whether the event is a hazard that timing alone must resolve.
    pub fn needs_stall(self) -> bool {
        !matches!(self, EventKind::RawForwardPossible)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimEvent {
    pub cycle: u32,
    pub newer: Position,
    pub older: Position,
    pub kind: EventKind,
    pub detail: String,
}

impl SimEvent {
    pub fn pair(&self) -> Option<StagePair> {
        Some(StagePair::new(self.newer.stage()?, self.older.stage()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleState {
    pub cycle: u32,
    pub newer: Position,
    pub older: Position,
    /// The newer instruction is held in place this cycle.
    pub held: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTimeline {
    pub gap: u32,
    /// cycle -> number of cycles the newer instruction is held from that cycle on.
    pub stall_schedule: BTreeMap<u32, u32>,
    pub cycles: Vec<CycleState>,
    pub events: Vec<SimEvent>,
}

impl SimTimeline {
    /// Cycles in which both instructions are inside the pipeline.
    pub fn co_resident(&self) -> impl Iterator<Item = &CycleState> {
        self.cycles
            .iter()
            .filter(|c| c.newer.stage().is_some() && c.older.stage().is_some())
    }

    pub fn has_stall_event(&self) -> bool {
        self.events.iter().any(|e| e.kind.needs_stall())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("entry gap must be at least 1")]
    ZeroGap,
    #[error("binding {binding} does not match operand roles of {older} -> {newer}")]
    InvalidBinding {
        binding: Binding,
        older: String,
        newer: String,
    },
    #[error("record does not belong to this binding and gap: {0}")]
    RecordMismatch(String),
}

/// Critical stages of one binding, resolved from the operand timing.
#[derive(Debug, Clone, Copy)]
enum Check {
    /// Newer needs the datum by `last_needed`; older has it in [first, last].
    Raw {
        last_needed: Stage,
        first: Stage,
        last: Stage,
    },
    /// Newer writes at `write`; older reads at `read`.
    War { write: Stage, read: Stage },
    /// Newer writes at `write`; older writes at `older_write`.
    Waw { write: Stage, older_write: Stage },
}

fn resolve(
    older: &InstructionSpec,
    newer: &InstructionSpec,
    binding: &Binding,
) -> Result<Check, SimError> {
    let bad = || SimError::InvalidBinding {
        binding: binding.clone(),
        older: older.opcode.clone(),
        newer: newer.opcode.clone(),
    };
    Ok(match binding.kind {
        HazardType::Raw => {
            let d = older.dest(&binding.older_operand).ok_or_else(bad)?;
            let s = newer.source(&binding.newer_operand).ok_or_else(bad)?;
            Check::Raw {
                last_needed: s.last_needed,
                first: d.first_avail,
                last: d.last_avail,
            }
        }
        HazardType::War => {
            let s = older.source(&binding.older_operand).ok_or_else(bad)?;
            let d = newer.dest(&binding.newer_operand).ok_or_else(bad)?;
            Check::War {
                write: d.write,
                read: s.read,
            }
        }
        HazardType::Waw => {
            let di = older.dest(&binding.older_operand).ok_or_else(bad)?;
            let dj = newer.dest(&binding.newer_operand).ok_or_else(bad)?;
            Check::Waw {
                write: dj.write,
                older_write: di.write,
            }
        }
    })
}

fn evaluate(check: Check, newer: Stage, older: Stage) -> Option<EventKind> {
    match check {
        Check::Raw {
            last_needed,
            first,
            last,
        } => {
            if newer != last_needed {
                None
            } else if older < first {
                Some(EventKind::RawStallNeeded)
            } else if older <= last {
                Some(EventKind::RawForwardPossible)
            } else {
                None
            }
        }
        Check::War { write, read } => {
            (newer == write && older <= read).then_some(EventKind::WarViolation)
        }
        Check::Waw { write, older_write } => {
            (newer == write && older <= older_write).then_some(EventKind::WawViolation)
        }
    }
}

/// Runs the pair with the newer instruction entering `gap` cycles after the
/// older one and held according to `stall_schedule`. Hazards are checked on
/// the cycle the newer instruction actually leaves a stage, never while held.
pub fn simulate_with_stalls(
    older: &InstructionSpec,
    newer: &InstructionSpec,
    gap: u32,
    binding: &Binding,
    stall_schedule: BTreeMap<u32, u32>,
) -> Result<SimTimeline, SimError> {
    if gap == 0 {
        return Err(SimError::ZeroGap);
    }
    let check = resolve(older, newer, binding)?;
    let mut cycles = Vec::new();
    let mut events = Vec::new();

    let mut newer_pos = Position::NotEntered;
    let mut hold = 0u32;
    let mut cycle = 0u32;
    loop {
        let older_pos = if cycle < older.depth {
            Position::Stage(cycle + 1)
        } else {
            Position::Retired
        };
        if newer_pos == Position::NotEntered && cycle >= gap {
            newer_pos = Position::Stage(1);
        }
        if let Some(&n) = stall_schedule.get(&cycle) {
            if newer_pos.stage().is_some() {
                hold += n;
            }
        }
        let held = hold > 0 && newer_pos.stage().is_some();
        cycles.push(CycleState {
            cycle,
            newer: newer_pos,
            older: older_pos,
            held,
        });
        if older_pos == Position::Retired || newer_pos == Position::Retired {
            break;
        }
        if let (Some(n), Some(o), false) = (newer_pos.stage(), older_pos.stage(), held) {
            if let Some(kind) = evaluate(check, n, o) {
                events.push(SimEvent {
                    cycle,
                    newer: newer_pos,
                    older: older_pos,
                    kind,
                    detail: binding.to_string(),
                });
            }
        }
        // advance
        if held {
            hold -= 1;
        } else if let Position::Stage(s) = newer_pos {
            newer_pos = if s >= newer.depth {
                Position::Retired
            } else {
                Position::Stage(s + 1)
            };
        }
        cycle += 1;
    }

    Ok(SimTimeline {
        gap,
        stall_schedule,
        cycles,
        events,
    })
}

/// Runs the pair without stalls.
pub fn simulate_pair(
    older: &InstructionSpec,
    newer: &InstructionSpec,
    gap: u32,
    binding: &Binding,
) -> Result<SimTimeline, SimError> {
    simulate_with_stalls(older, newer, gap, binding, BTreeMap::new())
}

/// Replays the pair with the record's resolution applied: a stall holds the
/// newer instruction at the record's `apply_at` point; a forward leaves the
/// timing untouched.
pub fn replay_with_resolution(
    older: &InstructionSpec,
    newer: &InstructionSpec,
    gap: u32,
    binding: &Binding,
    record: &HazardRecord,
) -> Result<SimTimeline, SimError> {
    if record.gap != gap {
        return Err(SimError::RecordMismatch(format!(
            "record gap {} differs from {gap}",
            record.gap
        )));
    }
    if record.kind != binding.kind
        || record.older.operand != binding.older_operand
        || record.newer.operand != binding.newer_operand
    {
        return Err(SimError::RecordMismatch(format!(
            "record {} {} / {} vs binding {binding}",
            record.kind, record.older, record.newer
        )));
    }
    let base = simulate_pair(older, newer, gap, binding)?;
    let cycles = match record.resolution {
        Resolution::Forward { .. } => return Ok(base),
        Resolution::Stall { cycles } => cycles,
    };
    let at = base
        .cycles
        .iter()
        .find(|c| {
            c.newer == Position::Stage(record.apply_at.newer)
                && c.older == Position::Stage(record.apply_at.older)
        })
        .ok_or_else(|| {
            SimError::RecordMismatch(format!(
                "apply point {} is not on the timeline",
                record.apply_at
            ))
        })?;
    let mut schedule = BTreeMap::new();
    schedule.insert(at.cycle, cycles);
    simulate_with_stalls(older, newer, gap, binding, schedule)
}

/// Smallest stall, applied when the newer instruction enters, that clears
/// every stall-requiring event. Bounded by the older instruction's depth.
fn minimal_stall(
    older: &InstructionSpec,
    newer: &InstructionSpec,
    gap: u32,
    binding: &Binding,
    entry_cycle: u32,
) -> Option<u32> {
    (1..=older.depth).find(|&n| {
        let schedule = BTreeMap::from([(entry_cycle, n)]);
        simulate_with_stalls(older, newer, gap, binding, schedule)
            .map(|t| !t.has_stall_event())
            .unwrap_or(false)
    })
}

fn bindings(older: &InstructionSpec, newer: &InstructionSpec, kind: HazardType) -> Vec<Binding> {
    let olders: Vec<&str> = match kind {
        HazardType::Raw | HazardType::Waw => older.dests.iter().map(|d| d.name.as_str()).collect(),
        HazardType::War => older.sources.iter().map(|s| s.name.as_str()).collect(),
    };
    let newers: Vec<&str> = match kind {
        HazardType::Raw => newer.sources.iter().map(|s| s.name.as_str()).collect(),
        HazardType::War | HazardType::Waw => newer.dests.iter().map(|d| d.name.as_str()).collect(),
    };
    let mut out = Vec::new();
    for o in &olders {
        for n in &newers {
            out.push(Binding::new(kind, *o, *n));
        }
    }
    out
}

/// Hazard records for one pair, binding and gap, derived from simulation.
pub fn oracle_records(
    older: &InstructionSpec,
    newer: &InstructionSpec,
    gap: u32,
    binding: &Binding,
) -> Result<Vec<HazardRecord>, SimError> {
    let timeline = simulate_pair(older, newer, gap, binding)?;
    let Some(entry) = timeline.co_resident().next().copied() else {
        return Ok(Vec::new());
    };
    let entry_pair = StagePair::new(
        entry.newer.stage().unwrap_or_default(),
        entry.older.stage().unwrap_or_default(),
    );
    let older_ref = OperandRef::new(&older.opcode, &binding.older_operand);
    let newer_ref = OperandRef::new(&newer.opcode, &binding.newer_operand);

    let mut out = Vec::new();
    for event in &timeline.events {
        let Some(pair) = event.pair() else { continue };
        let (resolution, apply_at, stalled) = if event.kind.needs_stall() {
            let Some(cycles) = minimal_stall(older, newer, gap, binding, entry.cycle) else {
                continue;
            };
            (
                Resolution::Stall { cycles },
                entry_pair,
                Some(newer.opcode.clone()),
            )
        } else {
            (
                Resolution::Forward {
                    from: pair.older,
                    to: pair.newer,
                },
                pair,
                None,
            )
        };
        out.push(HazardRecord {
            kind: binding.kind,
            older: older_ref.clone(),
            newer: newer_ref.clone(),
            hazard_pair: pair,
            gap: timeline.gap,
            resolution,
            apply_at,
            stalled,
        });
    }
    Ok(out)
}

/// Exhaustive sweep over every ordered instruction pair, binding and gap.
pub fn oracle_enumerate(set: &InstructionSet, types: &[HazardType]) -> Vec<HazardRecord> {
    let mut out = Vec::new();
    for &kind in types {
        for older in &set.instructions {
            for newer in &set.instructions {
                for binding in bindings(older, newer, kind) {
                    for gap in 1..older.depth {
                        let recs = oracle_records(older, newer, gap, &binding)
                            .expect("bindings are built from the instructions' own operands");
                        out.extend(recs);
                    }
                }
            }
        }
    }
    canonicalize(set, &mut out);
    out
}
