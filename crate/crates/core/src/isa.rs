//! Instruction-set timing model and the line-oriented ISA description format.
//!
//! An ISA description lists every instruction with its pipeline depth and the
//! stage timing of each operand:
//!
//! ```text
//! # two sample instructions
//! instruction inst1 depth=5
//!   dst d1 write=4 first_avail=3 last_avail=4
//!   dst d2 write=5 first_avail=5 last_avail=5
//! end
//! instruction inst2 depth=3
//!   src s1 read=1 first_needed=1 last_needed=1
//!   src s2 read=2 first_needed=1 last_needed=2
//! end
//! ```

use std::collections::HashSet;
use std::fmt;

/// 1-based pipeline stage number.
pub type Stage = u32;

/// A source operand: read at `read`, accepted anywhere in `[first_needed, last_needed]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceOperand {
    pub name: String,
    pub read: Stage,
    pub first_needed: Stage,
    pub last_needed: Stage,
}

/// A destination operand: written to its final location at `write`, present in
/// pipeline registers during `[first_avail, last_avail]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DestOperand {
    pub name: String,
    pub write: Stage,
    pub first_avail: Stage,
    pub last_avail: Stage,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InstructionSpec {
    pub opcode: String,
    pub depth: u32,
    pub sources: Vec<SourceOperand>,
    pub dests: Vec<DestOperand>,
}

impl InstructionSpec {
    pub fn source(&self, name: &str) -> Option<&SourceOperand> {
        self.sources.iter().find(|s| s.name == name)
    }

    pub fn dest(&self, name: &str) -> Option<&DestOperand> {
        self.dests.iter().find(|d| d.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InstructionSet {
    pub name: String,
    pub instructions: Vec<InstructionSpec>,
}

impl InstructionSet {
    pub fn new(name: impl Into<String>, instructions: Vec<InstructionSpec>) -> Self {
        InstructionSet {
            name: name.into(),
            instructions,
        }
    }

    pub fn get(&self, opcode: &str) -> Option<&InstructionSpec> {
        self.instructions.iter().find(|i| i.opcode == opcode)
    }

    pub fn position(&self, opcode: &str) -> Option<usize> {
        self.instructions.iter().position(|i| i.opcode == opcode)
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Where a diagnostic points: a line of the source document, or an
/// `opcode[.operand]` path for sets built in memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Location {
    Line(usize),
    Path(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "{n}"),
            Location::Path(p) => f.write_str(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

impl Diagnostic {
    fn error(location: Location, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            location,
            message: message.into(),
        }
    }

    fn warning(location: Location, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            location,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.severity, self.location, self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

/// Line numbers recorded while parsing, used to attach locations to the
/// semantic checks.
struct Lines {
    instruction: usize,
    sources: Vec<usize>,
    dests: Vec<usize>,
}

fn check_instruction(inst: &InstructionSpec, lines: Option<&Lines>, out: &mut Vec<Diagnostic>) {
    let inst_loc = || match lines {
        Some(l) => Location::Line(l.instruction),
        None => Location::Path(inst.opcode.clone()),
    };
    if inst.depth == 0 {
        out.push(Diagnostic::error(inst_loc(), "depth must be at least 1"));
    }

    let mut names = HashSet::new();
    let in_range = |s: Stage| s >= 1 && s <= inst.depth;

    for (idx, src) in inst.sources.iter().enumerate() {
        let loc = match lines {
            Some(l) => Location::Line(l.sources[idx]),
            None => Location::Path(format!("{}.{}", inst.opcode, src.name)),
        };
        if !names.insert(src.name.as_str()) {
            out.push(Diagnostic::error(
                loc.clone(),
                format!("duplicate operand name `{}`", src.name),
            ));
        }
        let stages = [
            ("read", src.read),
            ("first_needed", src.first_needed),
            ("last_needed", src.last_needed),
        ];
        let mut ranged = true;
        for (key, value) in stages {
            if !in_range(value) {
                ranged = false;
                out.push(Diagnostic::error(
                    loc.clone(),
                    format!(
                        "stage out of range: {key}={value} not in [1, {}]",
                        inst.depth
                    ),
                ));
            }
        }
        if src.first_needed > src.last_needed {
            out.push(Diagnostic::error(
                loc.clone(),
                "first_needed exceeds last_needed",
            ));
        } else if ranged && (src.read < src.first_needed || src.read > src.last_needed) {
            out.push(Diagnostic::warning(
                loc,
                "read stage outside needed interval",
            ));
        }
    }

    for (idx, dst) in inst.dests.iter().enumerate() {
        let loc = match lines {
            Some(l) => Location::Line(l.dests[idx]),
            None => Location::Path(format!("{}.{}", inst.opcode, dst.name)),
        };
        if !names.insert(dst.name.as_str()) {
            out.push(Diagnostic::error(
                loc.clone(),
                format!("duplicate operand name `{}`", dst.name),
            ));
        }
        let stages = [
            ("write", dst.write),
            ("first_avail", dst.first_avail),
            ("last_avail", dst.last_avail),
        ];
        let mut ranged = true;
        for (key, value) in stages {
            if !in_range(value) {
                ranged = false;
                out.push(Diagnostic::error(
                    loc.clone(),
                    format!(
                        "stage out of range: {key}={value} not in [1, {}]",
                        inst.depth
                    ),
                ));
            }
        }
        if dst.first_avail > dst.last_avail {
            out.push(Diagnostic::error(
                loc.clone(),
                "first_avail exceeds last_avail",
            ));
        }
        if dst.write > dst.last_avail {
            out.push(Diagnostic::error(
                loc.clone(),
                "write stage after last_avail",
            ));
        } else if ranged && dst.first_avail <= dst.last_avail && dst.write < dst.first_avail {
            out.push(Diagnostic::warning(loc, "write stage before first_avail"));
        }
    }
}

/// Checks every model invariant. Errors make the set unusable for analysis;
/// warnings flag unusual but legal timing.
pub fn validate(set: &InstructionSet) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for inst in &set.instructions {
        if !seen.insert(inst.opcode.as_str()) {
            out.push(Diagnostic::error(
                Location::Path(inst.opcode.clone()),
                format!("duplicate opcode `{}`", inst.opcode),
            ));
        }
        check_instruction(inst, None, &mut out);
    }
    out
}

/// Result of parsing a document: the set (when no errors were found) plus
/// every diagnostic, warnings included, in line order.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub set: Option<InstructionSet>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

struct OpenBlock {
    inst: InstructionSpec,
    lines: Lines,
}

/// Parses `key=value` tokens against an exact key list, returning values in
/// the order of `keys`.
fn parse_fields(
    tokens: &[&str],
    keys: &[&str],
    line: usize,
    out: &mut Vec<Diagnostic>,
) -> Option<Vec<u32>> {
    let mut values: Vec<Option<u32>> = vec![None; keys.len()];
    let mut ok = true;
    for tok in tokens {
        let Some((key, value)) = tok.split_once('=') else {
            out.push(Diagnostic::error(
                Location::Line(line),
                format!("malformed key=value token `{tok}`"),
            ));
            ok = false;
            continue;
        };
        let Some(slot) = keys.iter().position(|k| *k == key) else {
            out.push(Diagnostic::error(
                Location::Line(line),
                format!("unknown key `{key}`"),
            ));
            ok = false;
            continue;
        };
        if values[slot].is_some() {
            out.push(Diagnostic::error(
                Location::Line(line),
                format!("key `{key}` given more than once"),
            ));
            ok = false;
            continue;
        }
        match value.parse::<u32>() {
            Ok(v) if value.bytes().all(|b| b.is_ascii_digit()) => values[slot] = Some(v),
            _ => {
                out.push(Diagnostic::error(
                    Location::Line(line),
                    format!("malformed key=value token `{tok}`: expected a decimal integer"),
                ));
                ok = false;
            }
        }
    }
    for (key, value) in keys.iter().zip(&values) {
        if value.is_none() && ok {
            out.push(Diagnostic::error(
                Location::Line(line),
                format!("missing key `{key}`"),
            ));
        }
    }
    if !ok {
        return None;
    }
    values.into_iter().collect()
}

fn close_block(
    block: OpenBlock,
    set: &mut InstructionSet,
    seen: &mut HashSet<String>,
    out: &mut Vec<Diagnostic>,
) {
    if !seen.insert(block.inst.opcode.clone()) {
        out.push(Diagnostic::error(
            Location::Line(block.lines.instruction),
            format!("duplicate opcode `{}`", block.inst.opcode),
        ));
    }
    check_instruction(&block.inst, Some(&block.lines), out);
    set.instructions.push(block.inst);
}

/// Parses a document, collecting every diagnostic rather than stopping at
/// the first.
pub fn parse_document(text: &str) -> ParseOutcome {
    let mut set = InstructionSet::default();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut open: Option<OpenBlock> = None;
    // a block header that failed to parse; its body is skipped
    let mut skipping = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&keyword, rest)) = tokens.split_first() else {
            continue;
        };
        match keyword {
            "instruction" => {
                if let Some(block) = open.take() {
                    out.push(Diagnostic::error(
                        Location::Line(block.lines.instruction),
                        format!("missing `end` for instruction `{}`", block.inst.opcode),
                    ));
                    close_block(block, &mut set, &mut seen, &mut out);
                } else if skipping {
                    out.push(Diagnostic::error(Location::Line(line), "missing `end`"));
                }
                skipping = false;
                let Some((&opcode, fields)) = rest.split_first() else {
                    out.push(Diagnostic::error(Location::Line(line), "missing opcode"));
                    skipping = true;
                    continue;
                };
                if !is_identifier(opcode) {
                    out.push(Diagnostic::error(
                        Location::Line(line),
                        format!("invalid identifier `{opcode}`"),
                    ));
                    skipping = true;
                    continue;
                }
                match parse_fields(fields, &["depth"], line, &mut out) {
                    Some(v) => {
                        open = Some(OpenBlock {
                            inst: InstructionSpec {
                                opcode: opcode.to_string(),
                                depth: v[0],
                                sources: Vec::new(),
                                dests: Vec::new(),
                            },
                            lines: Lines {
                                instruction: line,
                                sources: Vec::new(),
                                dests: Vec::new(),
                            },
                        })
                    }
                    None => skipping = true,
                }
            }
            "src" | "dst" => {
                if skipping {
                    continue;
                }
                let Some(block) = open.as_mut() else {
                    out.push(Diagnostic::error(
                        Location::Line(line),
                        format!("`{keyword}` outside an instruction block"),
                    ));
                    continue;
                };
                let Some((&name, fields)) = rest.split_first() else {
                    out.push(Diagnostic::error(
                        Location::Line(line),
                        "missing operand name",
                    ));
                    continue;
                };
                if !is_identifier(name) {
                    out.push(Diagnostic::error(
                        Location::Line(line),
                        format!("invalid identifier `{name}`"),
                    ));
                    continue;
                }
                if keyword == "src" {
                    let keys = ["read", "first_needed", "last_needed"];
                    if let Some(v) = parse_fields(fields, &keys, line, &mut out) {
                        block.inst.sources.push(SourceOperand {
                            name: name.to_string(),
                            read: v[0],
                            first_needed: v[1],
                            last_needed: v[2],
                        });
                        block.lines.sources.push(line);
                    }
                } else {
                    let keys = ["write", "first_avail", "last_avail"];
                    if let Some(v) = parse_fields(fields, &keys, line, &mut out) {
                        block.inst.dests.push(DestOperand {
                            name: name.to_string(),
                            write: v[0],
                            first_avail: v[1],
                            last_avail: v[2],
                        });
                        block.lines.dests.push(line);
                    }
                }
            }
            "end" => {
                if !rest.is_empty() {
                    out.push(Diagnostic::error(
                        Location::Line(line),
                        "unexpected tokens after `end`",
                    ));
                }
                if let Some(block) = open.take() {
                    close_block(block, &mut set, &mut seen, &mut out);
                } else if skipping {
                    skipping = false;
                } else {
                    out.push(Diagnostic::error(
                        Location::Line(line),
                        "`end` without an open instruction block",
                    ));
                }
            }
            other => out.push(Diagnostic::error(
                Location::Line(line),
                format!("unknown keyword `{other}`"),
            )),
        }
    }
    if let Some(block) = open.take() {
        out.push(Diagnostic::error(
            Location::Line(block.lines.instruction),
            format!("missing `end` for instruction `{}`", block.inst.opcode),
        ));
        close_block(block, &mut set, &mut seen, &mut out);
    } else if skipping {
        out.push(Diagnostic::error(
            Location::Line(text.lines().count()),
            "missing `end`",
        ));
    }

    out.sort_by_key(|d| match d.location {
        Location::Line(n) => n,
        Location::Path(_) => usize::MAX,
    });
    let set = (!has_errors(&out)).then_some(set);
    ParseOutcome {
        set,
        diagnostics: out,
    }
}

/// Parses an ISA description. Warnings are dropped; any error fails the parse
/// and every error found is returned.
pub fn parse_instruction_set(text: &str) -> Result<InstructionSet, Vec<Diagnostic>> {
    let outcome = parse_document(text);
    match outcome.set {
        Some(set) => Ok(set),
        None => Err(outcome
            .diagnostics
            .into_iter()
            .filter(Diagnostic::is_error)
            .collect()),
    }
}

/// Renders a set in the canonical form accepted by [`parse_instruction_set`].
pub fn render_isa(set: &InstructionSet) -> String {
    let mut out = String::new();
    for inst in &set.instructions {
        out.push_str(&format!(
            "instruction {} depth={}\n",
            inst.opcode, inst.depth
        ));
        for s in &inst.sources {
            out.push_str(&format!(
                "  src {} read={} first_needed={} last_needed={}\n",
                s.name, s.read, s.first_needed, s.last_needed
            ));
        }
        for d in &inst.dests {
            out.push_str(&format!(
                "  dst {} write={} first_avail={} last_avail={}\n",
                d.name, d.write, d.first_avail, d.last_avail
            ));
        }
        out.push_str("end\n");
    }
    out
}

/// The stages `1..=depth` an instruction passes through.
pub fn execution_sequence(inst: &InstructionSpec) -> Vec<Stage> {
    (1..=inst.depth).collect()
}

/// A (newer stage, older stage) pair: the newer instruction is at `newer`
/// while the older one is at `older`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StagePair {
    pub newer: Stage,
    pub older: Stage,
}

impl StagePair {
    pub fn new(newer: Stage, older: Stage) -> Self {
        StagePair { newer, older }
    }
}

impl fmt::Display for StagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.newer, self.older)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupledSequence {
    pub gap: u32,
    pub pairs: Vec<StagePair>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("entry gap must be at least 1, got {0}")]
pub struct InvalidGap(pub u32);

/// Pairs of stages visited together when `newer` enters `gap` cycles after
/// `older`. Empty once `gap` reaches the older instruction's depth.
pub fn coupled_sequence(
    older: &InstructionSpec,
    newer: &InstructionSpec,
    gap: u32,
) -> Result<CoupledSequence, InvalidGap> {
    if gap == 0 {
        return Err(InvalidGap(gap));
    }
    let last = newer.depth.min(older.depth.saturating_sub(gap));
    Ok(CoupledSequence {
        gap,
        pairs: (1..=last).map(|a| StagePair::new(a, a + gap)).collect(),
    })
}

/// Every non-empty coupled sequence, in ascending gap order.
pub fn all_coupled_sequences(
    older: &InstructionSpec,
    newer: &InstructionSpec,
) -> Vec<CoupledSequence> {
    (1..older.depth)
        .filter_map(|gap| coupled_sequence(older, newer, gap).ok())
        .filter(|seq| !seq.pairs.is_empty())
        .collect()
}
