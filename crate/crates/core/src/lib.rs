//! Systematic enumeration of RAW, WAR and WAW data hazards for a pipelined
//! instruction set, with forward/stall resolutions, equivalence reduction and
//! a cycle-level oracle to check the results against.

pub mod enumerate;
pub mod equivalence;
pub mod fuzz;
pub mod isa;
pub mod record;
pub mod report;
pub mod samples;
pub mod simulate;
pub mod verify;

pub use enumerate::{enumerate_all, raw_hazards, war_hazards, waw_hazards};
pub use equivalence::{expand, operand_key, reduce, ReducedSet, ReductionLevel};
pub use isa::{
    all_coupled_sequences, coupled_sequence, execution_sequence, parse_instruction_set, validate,
    Diagnostic, InstructionSet, InstructionSpec, StagePair,
};
pub use record::{HazardCase, HazardRecord, HazardType, OperandRef, Resolution};
pub use simulate::{oracle_enumerate, replay_with_resolution, simulate_pair, Binding};
