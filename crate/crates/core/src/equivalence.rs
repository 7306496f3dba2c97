//! Equivalence reduction of instruction sets.
//!
//! Operands of one instruction are grouped by a timing key, and instructions
//! are grouped when they have the same depth and the same set of operand
//! class keys. Three levels exist, each keeping only the fields one analysis
//! depends on:
//!
//! | level | source key    | destination key                 |
//! |-------|---------------|---------------------------------|
//! | FULL  | (read, last)  | (write, first_avail, last_avail) |
//! | RAW   | (last)        | (first_avail, last_avail)        |
//! | WRITE | (read)        | (write)                          |

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::isa::{DestOperand, InstructionSet, InstructionSpec, SourceOperand, Stage};
use crate::record::{canonicalize, HazardRecord, HazardType, OperandRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionLevel {
    Full,
    Raw,
    Write,
}

impl fmt::Display for ReductionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionLevel::Full => "FULL",
            ReductionLevel::Raw => "RAW",
            ReductionLevel::Write => "WRITE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown reduction level `{0}` (expected full, raw or write)")]
pub struct UnknownLevel(pub String);

impl FromStr for ReductionLevel {
    type Err = UnknownLevel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(ReductionLevel::Full),
            "raw" => Ok(ReductionLevel::Raw),
            "write" => Ok(ReductionLevel::Write),
            _ => Err(UnknownLevel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Source,
    Dest,
}

/// Timing fields that decide equivalence at one level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperandKey(pub Vec<Stage>);

impl fmt::Display for OperandKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Either kind of operand, for key computation.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Source(&'a SourceOperand),
    Dest(&'a DestOperand),
}

pub fn operand_key(op: Operand<'_>, level: ReductionLevel) -> OperandKey {
    let key = match (op, level) {
        (Operand::Source(s), ReductionLevel::Full) => vec![s.read, s.last_needed],
        (Operand::Source(s), ReductionLevel::Raw) => vec![s.last_needed],
        (Operand::Source(s), ReductionLevel::Write) => vec![s.read],
        (Operand::Dest(d), ReductionLevel::Full) => vec![d.write, d.first_avail, d.last_avail],
        (Operand::Dest(d), ReductionLevel::Raw) => vec![d.first_avail, d.last_avail],
        (Operand::Dest(d), ReductionLevel::Write) => vec![d.write],
    };
    OperandKey(key)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperandClass {
    pub role: Role,
    pub key: OperandKey,
    /// `(opcode, operand)` in declaration order.
    pub members: Vec<(String, String)>,
}

impl OperandClass {
    /// The representative operand's name (first member).
    pub fn name(&self) -> &str {
        &self.members[0].1
    }

    fn members_of<'a>(&'a self, opcode: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.members
            .iter()
            .filter(move |(i, _)| i == opcode)
            .map(|(_, o)| o.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionClass {
    /// First member, with one operand per operand class.
    pub representative: InstructionSpec,
    pub members: Vec<String>,
    pub sources: Vec<OperandClass>,
    pub dests: Vec<OperandClass>,
}

#[derive(Debug, Clone)]
pub struct ReducedSet<'a> {
    pub level: ReductionLevel,
    pub classes: Vec<InstructionClass>,
    pub origin: &'a InstructionSet,
}

/// Groups operands by key, keeping first-occurrence order.
fn group_operands<T>(ops: &[T], key: impl Fn(&T) -> OperandKey) -> Vec<(OperandKey, Vec<usize>)> {
    let mut groups: Vec<(OperandKey, Vec<usize>)> = Vec::new();
    for (idx, op) in ops.iter().enumerate() {
        let k = key(op);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(idx),
            None => groups.push((k, vec![idx])),
        }
    }
    groups
}

type Signature = (u32, BTreeSet<OperandKey>, BTreeSet<OperandKey>);

/// Reduces `set` to maximal equivalence classes at `level`. Class
/// representatives are the first member in declaration order.
pub fn reduce(set: &InstructionSet, level: ReductionLevel) -> ReducedSet<'_> {
    let mut classes: Vec<InstructionClass> = Vec::new();
    let mut signatures: Vec<Signature> = Vec::new();

    for inst in &set.instructions {
        let src_groups = group_operands(&inst.sources, |s| operand_key(Operand::Source(s), level));
        let dst_groups = group_operands(&inst.dests, |d| operand_key(Operand::Dest(d), level));
        let signature: Signature = (
            inst.depth,
            src_groups.iter().map(|(k, _)| k.clone()).collect(),
            dst_groups.iter().map(|(k, _)| k.clone()).collect(),
        );

        let src_members = |class: &mut Vec<OperandClass>| {
            for (key, idxs) in &src_groups {
                let names = idxs
                    .iter()
                    .map(|&i| (inst.opcode.clone(), inst.sources[i].name.clone()));
                match class.iter_mut().find(|c| c.key == *key) {
                    Some(c) => c.members.extend(names),
                    None => class.push(OperandClass {
                        role: Role::Source,
                        key: key.clone(),
                        members: names.collect(),
                    }),
                }
            }
        };
        let dst_members = |class: &mut Vec<OperandClass>| {
            for (key, idxs) in &dst_groups {
                let names = idxs
                    .iter()
                    .map(|&i| (inst.opcode.clone(), inst.dests[i].name.clone()));
                match class.iter_mut().find(|c| c.key == *key) {
                    Some(c) => c.members.extend(names),
                    None => class.push(OperandClass {
                        role: Role::Dest,
                        key: key.clone(),
                        members: names.collect(),
                    }),
                }
            }
        };

        if let Some(pos) = signatures.iter().position(|s| *s == signature) {
            let class = &mut classes[pos];
            class.members.push(inst.opcode.clone());
            src_members(&mut class.sources);
            dst_members(&mut class.dests);
        } else {
            let representative = InstructionSpec {
                opcode: inst.opcode.clone(),
                depth: inst.depth,
                sources: src_groups
                    .iter()
                    .map(|(_, idxs)| inst.sources[idxs[0]].clone())
                    .collect(),
                dests: dst_groups
                    .iter()
                    .map(|(_, idxs)| inst.dests[idxs[0]].clone())
                    .collect(),
            };
            let mut sources = Vec::new();
            let mut dests = Vec::new();
            src_members(&mut sources);
            dst_members(&mut dests);
            signatures.push(signature);
            classes.push(InstructionClass {
                representative,
                members: vec![inst.opcode.clone()],
                sources,
                dests,
            });
        }
    }

    ReducedSet {
        level,
        classes,
        origin: set,
    }
}

impl ReducedSet<'_> {
    /// The representatives as a standalone instruction set.
    pub fn representatives(&self) -> InstructionSet {
        InstructionSet::new(
            self.origin.name.clone(),
            self.classes
                .iter()
                .map(|c| c.representative.clone())
                .collect(),
        )
    }

    fn class(&self, opcode: &str) -> Option<&InstructionClass> {
        self.classes
            .iter()
            .find(|c| c.representative.opcode == opcode)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpandError {
    #[error("record references unknown instruction class `{0}`")]
    UnknownClass(String),
    #[error("record references unknown operand class `{0}`")]
    UnknownOperand(OperandRef),
}

fn operand_class<'c>(
    reduced: &'c ReducedSet<'_>,
    r: &OperandRef,
    role: Role,
) -> Result<(&'c InstructionClass, &'c OperandClass), ExpandError> {
    let class = reduced
        .class(&r.inst)
        .ok_or_else(|| ExpandError::UnknownClass(r.inst.clone()))?;
    let ops = match role {
        Role::Source => &class.sources,
        Role::Dest => &class.dests,
    };
    let op = ops
        .iter()
        .find(|c| c.name() == r.operand)
        .ok_or_else(|| ExpandError::UnknownOperand(r.clone()))?;
    Ok((class, op))
}

/// Replicates class-level records for every concrete member combination and
/// returns them in canonical order over the origin set.
pub fn expand(
    records: &[HazardRecord],
    reduced: &ReducedSet<'_>,
) -> Result<Vec<HazardRecord>, ExpandError> {
    let mut out = Vec::new();
    for rec in records {
        let (older_role, newer_role) = match rec.kind {
            HazardType::Raw => (Role::Dest, Role::Source),
            HazardType::War => (Role::Source, Role::Dest),
            HazardType::Waw => (Role::Dest, Role::Dest),
        };
        let (older_class, older_ops) = operand_class(reduced, &rec.older, older_role)?;
        let (newer_class, newer_ops) = operand_class(reduced, &rec.newer, newer_role)?;
        for older_inst in &older_class.members {
            for newer_inst in &newer_class.members {
                for older_op in older_ops.members_of(older_inst) {
                    for newer_op in newer_ops.members_of(newer_inst) {
                        let mut concrete = rec.clone();
                        concrete.older = OperandRef::new(older_inst, older_op);
                        concrete.newer = OperandRef::new(newer_inst, newer_op);
                        if concrete.stalled.is_some() {
                            concrete.stalled = Some(newer_inst.clone());
                        }
                        out.push(concrete);
                    }
                }
            }
        }
    }
    canonicalize(reduced.origin, &mut out);
    Ok(out)
}
