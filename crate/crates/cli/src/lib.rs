//! Command-line driver for `hazmap`.
//!
//! Exit codes: 0 success, 1 diagnostics with errors, 2 usage error,
//! 3 verification mismatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hazmap::equivalence::{reduce, OperandClass, ReductionLevel};
use hazmap::fuzz::{random_set, FuzzConfig};
use hazmap::isa::{parse_document, Diagnostic, InstructionSet};
use hazmap::record::case_matrix;
use hazmap::report::{build_diagram, export_csv, render_diagram, render_hazard_tables};
use hazmap::verify::{verify_set, Mismatch};
use hazmap::{enumerate_all, Binding, HazardRecord, HazardType};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Diagnostics = 1,
    Usage = 2,
    Mismatch = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hazmap",
    version,
    about = "Enumerate data hazards of a pipelined instruction set"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an ISA description and print its diagnostics.
    Validate { path: PathBuf },
    /// List equivalence classes at a reduction level.
    Reduce {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::Full)]
        level: Level,
    },
    /// Enumerate hazards with their resolutions.
    Hazards(HazardsArgs),
    /// Draw the coupled-sequence grid for one operand binding.
    Diagram(DiagramArgs),
    /// Compare the enumeration rules with the simulation oracle.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Full,
    Raw,
    Write,
}

impl From<Level> for ReductionLevel {
    fn from(l: Level) -> Self {
        match l {
            Level::Full => ReductionLevel::Full,
            Level::Raw => ReductionLevel::Raw,
            Level::Write => ReductionLevel::Write,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Raw,
    War,
    Waw,
}

impl From<Kind> for HazardType {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Raw => HazardType::Raw,
            Kind::War => HazardType::War,
            Kind::Waw => HazardType::Waw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Debug, Args)]
pub struct HazardsArgs {
    pub path: PathBuf,
    /// Hazard types to enumerate.
    #[arg(long = "type", value_enum, value_delimiter = ',', default_values_t = [Kind::Raw, Kind::War, Kind::Waw])]
    pub types: Vec<Kind>,
    /// Restrict to one `older,newer` instruction pair.
    #[arg(long, value_delimiter = ',', num_args = 1, value_names = ["OLDER,NEWER"])]
    pub pair: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Enumerate every instruction directly instead of per equivalence class.
    #[arg(long)]
    pub no_reduce: bool,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    pub path: PathBuf,
    #[arg(long)]
    pub older: String,
    #[arg(long)]
    pub newer: String,
    #[arg(long = "type", value_enum)]
    pub kind: Kind,
    /// Destination operand: the older producer (RAW), the newer writer (WAR)
    /// or the first writer (WAW).
    #[arg(long)]
    pub dst: String,
    /// Source operand(s): the newer consumer (RAW) or the older reader (WAR).
    /// Several comma-separated RAW sources condense into one grid.
    #[arg(long, value_delimiter = ',', conflicts_with = "dst2")]
    pub src: Vec<String>,
    /// Second writer's destination (WAW).
    #[arg(long)]
    pub dst2: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// ISA descriptions to check.
    pub paths: Vec<PathBuf>,
    /// Check seeded random instruction sets instead of files.
    #[arg(long)]
    pub fuzz: bool,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub max_depth: u32,
    #[arg(long, default_value_t = 3)]
    pub max_ops: usize,
}

/// Output sinks; stdout carries only payload.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Signature of a hazard enumeration engine, swappable for testing.
pub type Rules = dyn Fn(&InstructionSet, &[HazardType]) -> Vec<HazardRecord>;

fn default_rules(set: &InstructionSet, types: &[HazardType]) -> Vec<HazardRecord> {
    enumerate_all(set, types, true)
}

pub fn run(cli: Cli, io: &mut Io<'_>) -> ExitStatus {
    run_with_rules(cli, io, &default_rules)
}

pub fn run_with_rules(cli: Cli, io: &mut Io<'_>, rules: &Rules) -> ExitStatus {
    let result = match cli.command {
        Command::Validate { path } => cmd_validate(&path, io),
        Command::Reduce { path, level } => cmd_reduce(&path, level.into(), io),
        Command::Hazards(args) => cmd_hazards(&args, io),
        Command::Diagram(args) => cmd_diagram(&args, io),
        Command::Verify(args) => cmd_verify(&args, io, rules),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(io.err, "error: {}", e.message);
            e.status
        }
    }
}

struct Failure {
    status: ExitStatus,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        status: ExitStatus::Usage,
        message: message.into(),
    }
}

fn print_diagnostics(diags: &[Diagnostic], io: &mut Io<'_>) {
    for d in diags {
        let _ = writeln!(io.err, "{d}");
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Loads a set for analysis: parse errors and an empty set are diagnostics
/// failures.
fn load(path: &Path, io: &mut Io<'_>) -> Result<InstructionSet, Failure> {
    let text = read(path)?;
    let outcome = parse_document(&text);
    let Some(mut set) = outcome.set else {
        print_diagnostics(&outcome.diagnostics, io);
        return Err(Failure {
            status: ExitStatus::Diagnostics,
            message: format!("{} has errors", path.display()),
        });
    };
    if set.is_empty() {
        return Err(Failure {
            status: ExitStatus::Diagnostics,
            message: format!("{}: instruction set is empty", path.display()),
        });
    }
    set.name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(set)
}

fn cmd_validate(path: &Path, io: &mut Io<'_>) -> Result<ExitStatus, Failure> {
    let outcome = parse_document(&read(path)?);
    print_diagnostics(&outcome.diagnostics, io);
    Ok(if outcome.set.is_some() {
        ExitStatus::Success
    } else {
        ExitStatus::Diagnostics
    })
}

fn write_classes(out: &mut dyn Write, role: &str, classes: &[OperandClass]) -> std::io::Result<()> {
    for c in classes {
        let members: Vec<String> = c.members.iter().map(|(i, o)| format!("{i}.{o}")).collect();
        writeln!(out, "  {role} {}: {}", c.key, members.join(" "))?;
    }
    Ok(())
}

fn cmd_reduce(path: &Path, level: ReductionLevel, io: &mut Io<'_>) -> Result<ExitStatus, Failure> {
    let set = load(path, io)?;
    let reduced = reduce(&set, level);
    let out = &mut *io.out;
    let res = (|| -> std::io::Result<()> {
        writeln!(out, "level {level}: {} classes", reduced.classes.len())?;
        for class in &reduced.classes {
            writeln!(
                out,
                "class {} depth={} members: {}",
                class.representative.opcode,
                class.representative.depth,
                class.members.join(" ")
            )?;
            write_classes(out, "src", &class.sources)?;
            write_classes(out, "dst", &class.dests)?;
        }
        Ok(())
    })();
    res.map_err(|e| usage(e.to_string()))?;
    Ok(ExitStatus::Success)
}

fn cmd_hazards(args: &HazardsArgs, io: &mut Io<'_>) -> Result<ExitStatus, Failure> {
    let set = load(&args.path, io)?;
    let types: Vec<HazardType> = args.types.iter().map(|&k| k.into()).collect();
    let pair = match &args.pair {
        None => None,
        Some(p) if p.len() == 2 => {
            for name in p {
                if set.get(name).is_none() {
                    return Err(usage(format!("unknown instruction `{name}`")));
                }
            }
            Some((p[0].as_str(), p[1].as_str()))
        }
        Some(_) => return Err(usage("--pair expects OLDER,NEWER")),
    };
    let mut records = enumerate_all(&set, &types, !args.no_reduce);
    if let Some((o, n)) = pair {
        records.retain(|r| r.older.inst == o && r.newer.inst == n);
    }
    let text = match args.format {
        Format::Csv => export_csv(&records),
        Format::Table => {
            let cases = case_matrix(&set, &types, pair);
            render_hazard_tables(&types, &records, Some(&cases))
        }
    };
    io.out
        .write_all(text.as_bytes())
        .map_err(|e| usage(e.to_string()))?;
    Ok(ExitStatus::Success)
}

fn cmd_diagram(args: &DiagramArgs, io: &mut Io<'_>) -> Result<ExitStatus, Failure> {
    let set = load(&args.path, io)?;
    let older = set
        .get(&args.older)
        .ok_or_else(|| usage(format!("unknown instruction `{}`", args.older)))?;
    let newer = set
        .get(&args.newer)
        .ok_or_else(|| usage(format!("unknown instruction `{}`", args.newer)))?;
    let kind: HazardType = args.kind.into();
    let bindings: Vec<Binding> = match kind {
        HazardType::Raw => args
            .src
            .iter()
            .map(|s| Binding::new(kind, &args.dst, s))
            .collect(),
        HazardType::War => args
            .src
            .iter()
            .map(|s| Binding::new(kind, s, &args.dst))
            .collect(),
        HazardType::Waw => args
            .dst2
            .iter()
            .map(|d| Binding::new(kind, &args.dst, d))
            .collect(),
    };
    if bindings.is_empty() {
        return Err(usage(match kind {
            HazardType::Waw => "waw diagrams need --dst2",
            _ => "raw and war diagrams need --src",
        }));
    }
    let records = enumerate_all(&set, &[kind], true);
    let diagram =
        build_diagram(older, newer, &bindings, &records).map_err(|e| usage(e.to_string()))?;
    io.out
        .write_all(render_diagram(&diagram).as_bytes())
        .map_err(|e| usage(e.to_string()))?;
    Ok(ExitStatus::Success)
}

fn report_mismatches(
    out: &mut dyn Write,
    origin: &str,
    set: &InstructionSet,
    mismatches: &[Mismatch],
) {
    for m in mismatches {
        let _ = writeln!(out, "{origin}: {m}");
    }
    if !mismatches.is_empty() {
        let _ = writeln!(out, "# {origin} instruction set:");
        let _ = out.write_all(hazmap::report::render_isa(set).as_bytes());
    }
}

fn cmd_verify(args: &VerifyArgs, io: &mut Io<'_>, rules: &Rules) -> Result<ExitStatus, Failure> {
    let types = HazardType::ALL;
    let mut total = 0usize;
    if args.fuzz {
        if !args.paths.is_empty() {
            return Err(usage("--fuzz does not take input files"));
        }
        if args.max_depth < 2 {
            return Err(usage("--max-depth must be at least 2"));
        }
        let cfg = FuzzConfig {
            max_depth: args.max_depth,
            max_ops: args.max_ops,
            ..FuzzConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let mut failing = 0usize;
        for sample in 0..args.samples {
            let set = random_set(&mut rng, &cfg);
            let mismatches = verify_set(&set, &types, rules);
            if !mismatches.is_empty() {
                failing += 1;
            }
            total += mismatches.len();
            report_mismatches(io.out, &format!("sample {sample}"), &set, &mismatches);
        }
        let _ = writeln!(
            io.out,
            "verify: seed {} samples {} max-depth {} max-ops {}: {} mismatches in {} samples",
            args.seed, args.samples, args.max_depth, args.max_ops, total, failing
        );
    } else {
        if args.paths.is_empty() {
            return Err(usage("give ISA files or --fuzz"));
        }
        for path in &args.paths {
            let set = load(path, io)?;
            let mismatches = verify_set(&set, &types, rules);
            total += mismatches.len();
            report_mismatches(io.out, &path.display().to_string(), &set, &mismatches);
            let _ = writeln!(
                io.out,
                "verify: {}: {} mismatches",
                path.display(),
                mismatches.len()
            );
        }
    }
    Ok(if total == 0 {
        ExitStatus::Success
    } else {
        ExitStatus::Mismatch
    })
}
