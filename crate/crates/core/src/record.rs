//! Hazard records and their canonical ordering.

use std::fmt;
use std::str::FromStr;

use crate::isa::{InstructionSet, Stage, StagePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HazardType {
    Raw,
    War,
    Waw,
}

impl HazardType {
    pub const ALL: [HazardType; 3] = [HazardType::Raw, HazardType::War, HazardType::Waw];

    pub fn as_str(self) -> &'static str {
        match self {
            HazardType::Raw => "RAW",
            HazardType::War => "WAR",
            HazardType::Waw => "WAW",
        }
    }
}

impl fmt::Display for HazardType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown hazard type `{0}` (expected raw, war or waw)")]
pub struct UnknownHazardType(pub String);

impl FromStr for HazardType {
    type Err = UnknownHazardType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(HazardType::Raw),
            "war" => Ok(HazardType::War),
            "waw" => Ok(HazardType::Waw),
            _ => Err(UnknownHazardType(s.to_string())),
        }
    }
}

/// An operand of a specific instruction (or instruction class representative).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperandRef {
    pub inst: String,
    pub operand: String,
}

impl OperandRef {
    pub fn new(inst: impl Into<String>, operand: impl Into<String>) -> Self {
        OperandRef {
            inst: inst.into(),
            operand: operand.into(),
        }
    }
}

impl fmt::Display for OperandRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.inst, self.operand)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolution {
    /// Bypass the datum from the older instruction's stage `from` to the
    /// newer instruction's stage `to`.
    Forward { from: Stage, to: Stage },
    /// Hold the newer instruction for `cycles` cycles.
    Stall { cycles: u32 },
}

impl Resolution {
    pub fn stall_cycles(&self) -> Option<u32> {
        match *self {
            Resolution::Stall { cycles } => Some(cycles),
            Resolution::Forward { .. } => None,
        }
    }

    pub fn is_stall(&self) -> bool {
        matches!(self, Resolution::Stall { .. })
    }
}

/// One hazard between two co-resident instructions.
///
/// `older` and `newer` name the conflicting operands; their roles depend on
/// the hazard type (RAW: dest/src, WAR: src/dest, WAW: dest/dest).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HazardRecord {
    pub kind: HazardType,
    pub older: OperandRef,
    pub newer: OperandRef,
    pub hazard_pair: StagePair,
    pub gap: u32,
    pub resolution: Resolution,
    pub apply_at: StagePair,
    /// Set for stalls; always the newer instruction.
    pub stalled: Option<String>,
}

impl HazardRecord {
    pub fn case(&self) -> HazardCase {
        HazardCase {
            kind: self.kind,
            older: self.older.clone(),
            newer: self.newer.clone(),
        }
    }
}

/// A binding of one older operand to one newer operand under a hazard type,
/// e.g. `inst1.d1 = inst2.s1` for RAW.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HazardCase {
    pub kind: HazardType,
    pub older: OperandRef,
    pub newer: OperandRef,
}

impl HazardCase {
    /// Label with the destination side first, and `(1)`/`(2)` issue suffixes
    /// when an instruction is paired with itself.
    pub fn label(&self) -> String {
        let same = self.older.inst == self.newer.inst;
        let fmt_side = |r: &OperandRef, issue: u8| {
            if same {
                format!("{}({}).{}", r.inst, issue, r.operand)
            } else {
                r.to_string()
            }
        };
        let older = fmt_side(&self.older, 1);
        let newer = fmt_side(&self.newer, 2);
        match self.kind {
            HazardType::War => format!("{newer} = {older}"),
            HazardType::Raw | HazardType::Waw => format!("{older} = {newer}"),
        }
    }

    /// The newer instruction as shown in a "stalled" column.
    pub fn stalled_label(&self) -> String {
        if self.older.inst == self.newer.inst {
            format!("{}(2)", self.newer.inst)
        } else {
            self.newer.inst.clone()
        }
    }
}

fn operand_position(set: &InstructionSet, r: &OperandRef, dest: bool) -> (usize, usize) {
    let Some(i) = set.position(&r.inst) else {
        return (usize::MAX, usize::MAX);
    };
    let inst = &set.instructions[i];
    let op = if dest {
        inst.dests.iter().position(|d| d.name == r.operand)
    } else {
        inst.sources.iter().position(|s| s.name == r.operand)
    };
    (i, op.unwrap_or(usize::MAX))
}

fn roles(kind: HazardType) -> (bool, bool) {
    match kind {
        HazardType::Raw => (true, false),
        HazardType::War => (false, true),
        HazardType::Waw => (true, true),
    }
}

type CaseKey = (HazardType, (usize, usize), (usize, usize));

fn case_key(set: &InstructionSet, case: &HazardCase) -> CaseKey {
    let (older_dest, newer_dest) = roles(case.kind);
    (
        case.kind,
        operand_position(set, &case.older, older_dest),
        operand_position(set, &case.newer, newer_dest),
    )
}

/// Sorts records into canonical order and drops duplicates: hazard type, then
/// declaration order of the older instruction and operand, then of the newer
/// ones, then by the older instruction's stage.
pub fn canonicalize(set: &InstructionSet, records: &mut Vec<HazardRecord>) {
    records.sort_by_cached_key(|r| {
        let (kind, older, newer) = case_key(set, &r.case());
        (kind, older, newer, r.hazard_pair.older, r.hazard_pair.newer)
    });
    records.dedup();
}

/// Every hazard case of the requested types in canonical order, optionally
/// restricted to one (older, newer) instruction pair.
pub fn case_matrix(
    set: &InstructionSet,
    types: &[HazardType],
    pair: Option<(&str, &str)>,
) -> Vec<HazardCase> {
    let mut out = Vec::new();
    let mut kinds = types.to_vec();
    kinds.sort();
    kinds.dedup();
    for kind in kinds {
        for older in &set.instructions {
            for newer in &set.instructions {
                if let Some((o, n)) = pair {
                    if older.opcode != o || newer.opcode != n {
                        continue;
                    }
                }
                let older_ops: Vec<&str> = match kind {
                    HazardType::Raw | HazardType::Waw => {
                        older.dests.iter().map(|d| d.name.as_str()).collect()
                    }
                    HazardType::War => older.sources.iter().map(|s| s.name.as_str()).collect(),
                };
                let newer_ops: Vec<&str> = match kind {
                    HazardType::Raw => newer.sources.iter().map(|s| s.name.as_str()).collect(),
                    HazardType::War | HazardType::Waw => {
                        newer.dests.iter().map(|d| d.name.as_str()).collect()
                    }
                };
                for o in &older_ops {
                    for n in &newer_ops {
                        out.push(HazardCase {
                            kind,
                            older: OperandRef::new(&older.opcode, *o),
                            newer: OperandRef::new(&newer.opcode, *n),
                        });
                    }
                }
            }
        }
    }
    out.sort_by_cached_key(|c| case_key(set, c));
    out
}
