//! Closed-form hazard enumeration rules.
//!
//! Each rule walks the older instruction's stage `k` while the newer
//! instruction sits at its critical stage (RAW: last needed stage of the
//! source, WAR/WAW: write stage of the destination). Since the newer
//! instruction entered later, only `k` strictly greater than the critical
//! stage lies on a coupled sequence.

use crate::equivalence::{expand, reduce, ReductionLevel};
use crate::isa::{DestOperand, InstructionSet, InstructionSpec, SourceOperand, StagePair};
use crate::record::{canonicalize, HazardRecord, HazardType, OperandRef, Resolution};

fn stall_record(
    kind: HazardType,
    older: OperandRef,
    newer: OperandRef,
    critical: u32,
    k: u32,
    cycles: u32,
) -> HazardRecord {
    let gap = k - critical;
    let stalled = Some(newer.inst.clone());
    HazardRecord {
        kind,
        older,
        newer,
        hazard_pair: StagePair::new(critical, k),
        gap,
        resolution: Resolution::Stall { cycles },
        apply_at: StagePair::new(1, gap + 1),
        stalled,
    }
}

/// RAW hazards of a consumer source against an older producer destination.
///
/// With the producer at stage `k` while the consumer sits at `last_needed`:
/// `k` inside the availability interval is forwarded from `k`, and `k` before
/// it stalls the consumer for `first_avail - k` cycles. Once the producer is
/// past `last_avail` the datum is in its final location and nothing happens.
pub fn raw_hazards(
    producer: &InstructionSpec,
    d: &DestOperand,
    consumer: &InstructionSpec,
    s: &SourceOperand,
) -> Vec<HazardRecord> {
    let ln = s.last_needed;
    let older = OperandRef::new(&producer.opcode, &d.name);
    let newer = OperandRef::new(&consumer.opcode, &s.name);
    if ln > consumer.depth {
        return Vec::new();
    }
    let top = d.last_avail.min(producer.depth);
    (ln + 1..=top)
        .map(|k| {
            if k >= d.first_avail {
                HazardRecord {
                    kind: HazardType::Raw,
                    older: older.clone(),
                    newer: newer.clone(),
                    hazard_pair: StagePair::new(ln, k),
                    gap: k - ln,
                    resolution: Resolution::Forward { from: k, to: ln },
                    apply_at: StagePair::new(ln, k),
                    stalled: None,
                }
            } else {
                stall_record(
                    HazardType::Raw,
                    older.clone(),
                    newer.clone(),
                    ln,
                    k,
                    d.first_avail - k,
                )
            }
        })
        .collect()
}

/// WAR hazards of a newer writer against an older reader: the write at stage
/// `write` must come strictly after the read at `read`.
pub fn war_hazards(
    reader: &InstructionSpec,
    s: &SourceOperand,
    writer: &InstructionSpec,
    d: &DestOperand,
) -> Vec<HazardRecord> {
    let w = d.write;
    if w > writer.depth {
        return Vec::new();
    }
    let top = s.read.min(reader.depth);
    (w + 1..=top)
        .map(|k| {
            stall_record(
                HazardType::War,
                OperandRef::new(&reader.opcode, &s.name),
                OperandRef::new(&writer.opcode, &d.name),
                w,
                k,
                s.read - k + 1,
            )
        })
        .collect()
}

/// WAW hazards of a second writer against an older first writer: the second
/// write must come strictly after the first.
pub fn waw_hazards(
    first_writer: &InstructionSpec,
    d_first: &DestOperand,
    second_writer: &InstructionSpec,
    d_second: &DestOperand,
) -> Vec<HazardRecord> {
    let w = d_second.write;
    if w > second_writer.depth {
        return Vec::new();
    }
    let top = d_first.write.min(first_writer.depth);
    (w + 1..=top)
        .map(|k| {
            stall_record(
                HazardType::Waw,
                OperandRef::new(&first_writer.opcode, &d_first.name),
                OperandRef::new(&second_writer.opcode, &d_second.name),
                w,
                k,
                d_first.write - k + 1,
            )
        })
        .collect()
}

/// Applies the rule for `kind` to every ordered instruction pair of
/// `instructions`, self-pairs included, in declaration order.
fn enumerate_kind(instructions: &[InstructionSpec], kind: HazardType) -> Vec<HazardRecord> {
    let mut out = Vec::new();
    for older in instructions {
        for newer in instructions {
            match kind {
                HazardType::Raw => {
                    for d in &older.dests {
                        for s in &newer.sources {
                            out.extend(raw_hazards(older, d, newer, s));
                        }
                    }
                }
                HazardType::War => {
                    for s in &older.sources {
                        for d in &newer.dests {
                            out.extend(war_hazards(older, s, newer, d));
                        }
                    }
                }
                HazardType::Waw => {
                    for di in &older.dests {
                        for dj in &newer.dests {
                            out.extend(waw_hazards(older, di, newer, dj));
                        }
                    }
                }
            }
        }
    }
    out
}

/// The reduction level at which a hazard type is enumerated.
pub fn level_for(kind: HazardType) -> ReductionLevel {
    match kind {
        HazardType::Raw => ReductionLevel::Raw,
        HazardType::War | HazardType::Waw => ReductionLevel::Write,
    }
}

/// Enumerates every hazard of the requested types over all ordered
/// instruction pairs. With `use_reduction`, runs once per equivalence class
/// and expands back to concrete instructions; the result is identical either
/// way. Output is canonical and duplicate-free.
pub fn enumerate_all(
    set: &InstructionSet,
    types: &[HazardType],
    use_reduction: bool,
) -> Vec<HazardRecord> {
    let mut kinds = types.to_vec();
    kinds.sort();
    kinds.dedup();
    let mut out = Vec::new();
    for kind in kinds {
        if use_reduction {
            let reduced = reduce(set, level_for(kind));
            let reps: Vec<InstructionSpec> = reduced
                .classes
                .iter()
                .map(|c| c.representative.clone())
                .collect();
            let class_records = enumerate_kind(&reps, kind);
            out.extend(
                expand(&class_records, &reduced)
                    .expect("class-level records always reference their own reduced set"),
            );
        } else {
            out.extend(enumerate_kind(&set.instructions, kind));
        }
    }
    canonicalize(set, &mut out);
    out
}
