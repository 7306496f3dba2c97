//! Two small instruction sets used throughout the tests and documentation.

use crate::isa::{parse_instruction_set, InstructionSet};

/// A five-stage producer (`inst1`, results `d1`, `d2`) and a three-stage
/// consumer (`inst2`, sources `s1`, `s2`).
pub const RAW_SAMPLE: &str = include_str!("../data/raw_sample.isa");

/// A writer (`inst1`, writing at stages 1 and 2) and a reader (`inst2`,
/// reading at stages 4 and 5).
pub const WRITE_SAMPLE: &str = include_str!("../data/write_sample.isa");

pub fn raw_sample() -> InstructionSet {
    let mut set = parse_instruction_set(RAW_SAMPLE).expect("bundled sample parses");
    set.name = "raw_sample".into();
    set
}

pub fn write_sample() -> InstructionSet {
    let mut set = parse_instruction_set(WRITE_SAMPLE).expect("bundled sample parses");
    set.name = "write_sample".into();
    set
}
