//! Seeded random instruction sets whose operands satisfy every invariant by
//! construction.

use rand::Rng;

use crate::isa::{DestOperand, InstructionSet, InstructionSpec, SourceOperand, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzConfig {
    /// Upper bound on depth; depth is uniform in `[2, max_depth]`.
    pub max_depth: u32,
    /// Sources and destinations per instruction are each uniform in `[0, max_ops]`.
    pub max_ops: usize,
    pub max_instructions: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            max_depth: 8,
            max_ops: 3,
            max_instructions: 4,
        }
    }
}

fn ordered_pair<R: Rng + ?Sized>(rng: &mut R, depth: u32) -> (Stage, Stage) {
    let a = rng.gen_range(1..=depth);
    let b = rng.gen_range(1..=depth);
    (a.min(b), a.max(b))
}

pub fn random_instruction<R: Rng + ?Sized>(
    rng: &mut R,
    opcode: String,
    cfg: &FuzzConfig,
) -> InstructionSpec {
    let depth = rng.gen_range(2..=cfg.max_depth.max(2));
    let n_src = rng.gen_range(0..=cfg.max_ops);
    let n_dst = rng.gen_range(0..=cfg.max_ops);
    let sources = (0..n_src)
        .map(|i| {
            let (first_needed, last_needed) = ordered_pair(rng, depth);
            SourceOperand {
                name: format!("s{}", i + 1),
                read: rng.gen_range(first_needed..=last_needed),
                first_needed,
                last_needed,
            }
        })
        .collect();
    let dests = (0..n_dst)
        .map(|i| {
            let (first_avail, last_avail) = ordered_pair(rng, depth);
            DestOperand {
                name: format!("d{}", i + 1),
                write: rng.gen_range(1..=last_avail),
                first_avail,
                last_avail,
            }
        })
        .collect();
    InstructionSpec {
        opcode,
        depth,
        sources,
        dests,
    }
}

/// A set of `1..=max_instructions` instructions named `op1`, `op2`, ...
pub fn random_set<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig) -> InstructionSet {
    let n = rng.gen_range(1..=cfg.max_instructions.max(1));
    let mut instructions: Vec<InstructionSpec> = (0..n)
        .map(|i| random_instruction(rng, format!("op{}", i + 1), cfg))
        .collect();
    // Occasionally clone timing under a new opcode so reductions have
    // something to merge.
    if n > 1 && rng.gen_bool(0.5) {
        let src = rng.gen_range(0..n);
        let dst = rng.gen_range(0..n);
        if src != dst {
            let opcode = instructions[dst].opcode.clone();
            instructions[dst] = InstructionSpec {
                opcode,
                ..instructions[src].clone()
            };
        }
    }
    InstructionSet::new("fuzz", instructions)
}
