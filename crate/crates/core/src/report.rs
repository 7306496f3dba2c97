//! Text renderers: hazard tables, coupled-sequence diagrams and CSV.

use std::fmt::Write as _;

use crate::isa::{InstructionSpec, Stage, StagePair};
use crate::record::{HazardCase, HazardRecord, HazardType, OperandRef, Resolution};
use crate::simulate::Binding;

pub use crate::isa::render_isa;

fn fmt_table(headings: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headings.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, cell) in cells.enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            let _ = write!(s, "{:1$}", cell, widths[i]);
        }
        s.trim_end().to_string()
    };
    let mut out = line(&mut headings.iter().copied());
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
        out.push('\n');
    }
    out
}

fn headings(kind: HazardType) -> &'static [&'static str] {
    match kind {
        HazardType::Raw => &[
            "Case",
            "Hazard",
            "Forward",
            "Stalled inst.",
            "# of stall cycles",
        ],
        HazardType::War | HazardType::Waw => {
            &["Case", "Hazard", "Stalled inst.", "# of stall cycles"]
        }
    }
}

fn row(kind: HazardType, case_cell: String, rec: Option<&HazardRecord>) -> Vec<String> {
    let dash = || "-".to_string();
    let Some(rec) = rec else {
        return std::iter::once(case_cell)
            .chain(std::iter::repeat_with(dash).take(headings(kind).len() - 1))
            .collect();
    };
    let mut cells = vec![case_cell, rec.hazard_pair.to_string()];
    match rec.resolution {
        Resolution::Forward { from, to } => {
            cells.push(format!("{from} -> {to}"));
            cells.push(dash());
            cells.push(dash());
        }
        Resolution::Stall { cycles } => {
            if kind == HazardType::Raw {
                cells.push(dash());
            }
            cells.push(rec.case().stalled_label());
            cells.push(cycles.to_string());
        }
    }
    cells
}

/// Renders the records of one hazard type grouped by case, one row per
/// hazard with the case named on its first row only. When `cases` is given,
/// every case is listed in that order and cases without hazards get a `-`
/// row; otherwise only cases with records appear, in record order.
pub fn render_hazard_table(
    kind: HazardType,
    records: &[HazardRecord],
    cases: Option<&[HazardCase]>,
) -> String {
    let records: Vec<&HazardRecord> = records.iter().filter(|r| r.kind == kind).collect();
    let mut order: Vec<HazardCase> = match cases {
        Some(cases) => cases.iter().filter(|c| c.kind == kind).cloned().collect(),
        None => Vec::new(),
    };
    for rec in &records {
        let case = rec.case();
        if !order.contains(&case) {
            order.push(case);
        }
    }
    let mut rows = Vec::new();
    for case in &order {
        let mut first = true;
        for rec in records.iter().filter(|r| r.case() == *case) {
            let label = if first { case.label() } else { String::new() };
            rows.push(row(kind, label, Some(rec)));
            first = false;
        }
        if first {
            rows.push(row(kind, case.label(), None));
        }
    }
    fmt_table(headings(kind), &rows)
}

/// One titled table per hazard type, separated by blank lines.
pub fn render_hazard_tables(
    types: &[HazardType],
    records: &[HazardRecord],
    cases: Option<&[HazardCase]>,
) -> String {
    let mut kinds = types.to_vec();
    kinds.sort();
    kinds.dedup();
    kinds
        .iter()
        .map(|&k| format!("{k} hazards\n{}", render_hazard_table(k, records, cases)))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HazardMark {
    Stall,
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Cell {
    /// The pair lies on some coupled sequence.
    pub on_sequence: bool,
    pub hazard: Option<HazardMark>,
}

/// Grid of (newer stage, older stage) pairs for one pair of instructions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub kind: HazardType,
    pub older: String,
    pub newer: String,
    pub bindings: Vec<Binding>,
    /// `cells[newer - 1][older - 1]`
    pub cells: Vec<Vec<Cell>>,
    /// Interval of the older operand at each older stage (1-based values).
    pub column_intervals: Vec<u8>,
    /// Newer stages at which the hazard is checked.
    pub critical_rows: Vec<Stage>,
}

impl Diagram {
    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn cell(&self, pair: StagePair) -> Option<&Cell> {
        self.cells
            .get(pair.newer.checked_sub(1)? as usize)?
            .get(pair.older.checked_sub(1)? as usize)
    }

    /// Every marked cell in row-major order, bottom row first.
    pub fn hazard_cells(&self) -> Vec<(StagePair, HazardMark)> {
        let mut out = Vec::new();
        for (r, row) in self.cells.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if let Some(mark) = cell.hazard {
                    out.push((StagePair::new(r as u32 + 1, c as u32 + 1), mark));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("unknown {role} operand `{name}` on `{inst}`")]
    UnknownOperand {
        role: &'static str,
        name: String,
        inst: String,
    },
    #[error("a diagram needs at least one binding, all of the same hazard type")]
    BadBindings,
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

fn unknown(role: &'static str, name: &str, inst: &InstructionSpec) -> ReportError {
    ReportError::UnknownOperand {
        role,
        name: name.to_string(),
        inst: inst.opcode.clone(),
    }
}

/// Builds the coupled-sequence grid for one or more bindings of the same
/// hazard type between `older` and `newer`. Several bindings condense into
/// one grid with several critical rows.
pub fn build_diagram(
    older: &InstructionSpec,
    newer: &InstructionSpec,
    bindings: &[Binding],
    records: &[HazardRecord],
) -> Result<Diagram, ReportError> {
    let Some(first) = bindings.first() else {
        return Err(ReportError::BadBindings);
    };
    let kind = first.kind;
    if bindings.iter().any(|b| b.kind != kind) {
        return Err(ReportError::BadBindings);
    }

    let mut critical_rows = Vec::new();
    let mut column_intervals = Vec::new();
    for (i, b) in bindings.iter().enumerate() {
        let (row, bounds) = match kind {
            HazardType::Raw => {
                let d = older
                    .dest(&b.older_operand)
                    .ok_or_else(|| unknown("destination", &b.older_operand, older))?;
                let s = newer
                    .source(&b.newer_operand)
                    .ok_or_else(|| unknown("source", &b.newer_operand, newer))?;
                (s.last_needed, (d.first_avail, d.last_avail))
            }
            HazardType::War => {
                let s = older
                    .source(&b.older_operand)
                    .ok_or_else(|| unknown("source", &b.older_operand, older))?;
                let d = newer
                    .dest(&b.newer_operand)
                    .ok_or_else(|| unknown("destination", &b.newer_operand, newer))?;
                (d.write, (s.read + 1, s.read + 1))
            }
            HazardType::Waw => {
                let di = older
                    .dest(&b.older_operand)
                    .ok_or_else(|| unknown("destination", &b.older_operand, older))?;
                let dj = newer
                    .dest(&b.newer_operand)
                    .ok_or_else(|| unknown("destination", &b.newer_operand, newer))?;
                (dj.write, (di.write + 1, di.write + 1))
            }
        };
        if !critical_rows.contains(&row) {
            critical_rows.push(row);
        }
        if i == 0 {
            let (lo, hi) = bounds;
            column_intervals = (1..=older.depth)
                .map(|k| match kind {
                    HazardType::Raw if k < lo => 1,
                    HazardType::Raw if k <= hi => 2,
                    HazardType::Raw => 3,
                    _ if k < lo => 1,
                    _ => 2,
                })
                .collect();
        }
    }
    critical_rows.sort_unstable();

    let mut cells: Vec<Vec<Cell>> = (1..=newer.depth)
        .map(|a| {
            (1..=older.depth)
                .map(|b| Cell {
                    on_sequence: b > a,
                    hazard: None,
                })
                .collect()
        })
        .collect();

    for rec in records {
        let matches = bindings.iter().any(|b| {
            rec.kind == b.kind
                && rec.older == OperandRef::new(&older.opcode, &b.older_operand)
                && rec.newer == OperandRef::new(&newer.opcode, &b.newer_operand)
        });
        if !matches {
            continue;
        }
        let (a, b) = (rec.hazard_pair.newer, rec.hazard_pair.older);
        let Some(cell) = cells
            .get_mut(a as usize - 1)
            .and_then(|row| row.get_mut(b as usize - 1))
        else {
            continue;
        };
        let mark = match rec.resolution {
            Resolution::Stall { .. } => HazardMark::Stall,
            Resolution::Forward { .. } => HazardMark::Forward,
        };
        // stall wins if condensed bindings disagree on a cell
        if cell.hazard != Some(HazardMark::Stall) {
            cell.hazard = Some(mark);
        }
    }

    Ok(Diagram {
        kind,
        older: older.opcode.clone(),
        newer: newer.opcode.clone(),
        bindings: bindings.to_vec(),
        cells,
        column_intervals,
        critical_rows,
    })
}

/// Renders a diagram as an ASCII grid: rows are newer-instruction stages with
/// stage 1 at the bottom, columns are older-instruction stages. A legend
/// follows every grid.
pub fn render_diagram(diagram: &Diagram) -> String {
    let width = diagram.cols().max(diagram.rows()).to_string().len().max(1) + 1;
    let label_width = diagram.rows().to_string().len();
    let mut out = String::new();

    let cases: Vec<String> = diagram
        .bindings
        .iter()
        .map(|b| {
            HazardCase {
                kind: b.kind,
                older: OperandRef::new(&diagram.older, &b.older_operand),
                newer: OperandRef::new(&diagram.newer, &b.newer_operand),
            }
            .label()
        })
        .collect();
    let _ = writeln!(out, "{} {}", diagram.kind, cases.join(", "));
    let _ = writeln!(
        out,
        "rows: {} stage (newer), columns: {} stage (older)",
        diagram.newer, diagram.older
    );
    out.push('\n');

    for r in (0..diagram.rows()).rev() {
        let stage = r as u32 + 1;
        let marker = if diagram.critical_rows.contains(&stage) {
            '>'
        } else {
            ' '
        };
        let mut line = format!("{marker} {:>label_width$} |", stage);
        for cell in &diagram.cells[r] {
            let glyph = match (cell.hazard, cell.on_sequence) {
                (Some(HazardMark::Stall), _) => 'S',
                (Some(HazardMark::Forward), _) => 'F',
                (None, true) => 'o',
                (None, false) => '.',
            };
            let _ = write!(line, "{glyph:>width$}");
        }
        out.push_str(&line);
        out.push('\n');
    }
    let pad = " ".repeat(label_width + 3);
    let _ = writeln!(out, "{pad}+{}", "-".repeat(width * diagram.cols()));
    let mut stages = format!("{pad} ");
    let mut intervals = format!("{pad} ");
    for (c, iv) in diagram.column_intervals.iter().enumerate() {
        let _ = write!(stages, "{:>width$}", c + 1);
        let _ = write!(intervals, "{iv:>width$}");
    }
    out.push_str(stages.trim_end());
    out.push('\n');
    out.push_str(intervals.trim_end());
    out.push_str("  interval\n\n");

    out.push_str("legend: o coupled pair, . not co-resident, S stall, F forward\n");
    out.push_str("        > newer stage where the hazard is checked\n");
    match diagram.kind {
        HazardType::Raw => out.push_str(
            "        interval: 1 result not yet available, 2 available in pipeline, 3 at final destination\n",
        ),
        HazardType::War => {
            out.push_str("        interval: 1 older read still pending, 2 older read done\n")
        }
        HazardType::Waw => {
            out.push_str("        interval: 1 older write still pending, 2 older write done\n")
        }
    }
    out
}

pub const CSV_HEADER: &str = "type,older_inst,older_operand,newer_inst,newer_operand,newer_stage,older_stage,gap,action,forward_from,forward_to,stall_cycles,apply_newer_stage,apply_older_stage";

/// One CSV row per record, LF line endings, empty fields where a column
/// does not apply.
pub fn export_csv(records: &[HazardRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let (action, from, to, stalls) = match r.resolution {
            Resolution::Forward { from, to } => {
                ("forward", from.to_string(), to.to_string(), String::new())
            }
            Resolution::Stall { cycles } => {
                ("stall", String::new(), String::new(), cycles.to_string())
            }
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.kind,
            r.older.inst,
            r.older.operand,
            r.newer.inst,
            r.newer.operand,
            r.hazard_pair.newer,
            r.hazard_pair.older,
            r.gap,
            action,
            from,
            to,
            stalls,
            r.apply_at.newer,
            r.apply_at.older
        );
    }
    out
}

/// Parses CSV produced by [`export_csv`].
pub fn import_csv(text: &str) -> Result<Vec<HazardRecord>, ReportError> {
    let err = |line: usize, message: String| ReportError::Csv { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(err(1, "missing or unexpected header".into())),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let n = idx + 1;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(err(n, format!("expected 14 fields, found {}", f.len())));
        }
        let num = |i: usize| {
            f[i].parse::<u32>()
                .map_err(|_| err(n, format!("field {} is not a number: `{}`", i + 1, f[i])))
        };
        let kind: HazardType = f[0]
            .parse()
            .map_err(|e: crate::record::UnknownHazardType| err(n, e.to_string()))?;
        let newer = OperandRef::new(f[3], f[4]);
        let (resolution, stalled) = match f[8] {
            "forward" => (
                Resolution::Forward {
                    from: num(9)?,
                    to: num(10)?,
                },
                None,
            ),
            "stall" => (
                Resolution::Stall { cycles: num(11)? },
                Some(newer.inst.clone()),
            ),
            other => return Err(err(n, format!("unknown action `{other}`"))),
        };
        out.push(HazardRecord {
            kind,
            older: OperandRef::new(f[1], f[2]),
            newer,
            hazard_pair: StagePair::new(num(5)?, num(6)?),
            gap: num(7)?,
            resolution,
            apply_at: StagePair::new(num(12)?, num(13)?),
            stalled,
        });
    }
    Ok(out)
}
