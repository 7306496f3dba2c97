use std::collections::{BTreeMap, HashSet};

use hazmap::equivalence::{operand_key, reduce, Operand, ReductionLevel};
use hazmap::isa::{
    coupled_sequence, has_errors, parse_instruction_set, render_isa, validate, DestOperand,
    InstructionSet, InstructionSpec, SourceOperand,
};
use hazmap::record::{HazardRecord, HazardType, Resolution};
use hazmap::report::{export_csv, import_csv};
use hazmap::simulate::{
    oracle_enumerate, replay_with_resolution, simulate_pair, simulate_with_stalls, Binding,
};
use hazmap::{enumerate_all, raw_hazards, StagePair};
use proptest::prelude::*;

fn interval(depth: u32) -> impl Strategy<Value = (u32, u32)> {
    (1..=depth, 1..=depth).prop_map(|(a, b)| (a.min(b), a.max(b)))
}

fn source(depth: u32) -> impl Strategy<Value = (u32, u32, u32)> {
    interval(depth).prop_flat_map(|(f, l)| (f..=l).prop_map(move |r| (r, f, l)))
}

fn dest(depth: u32) -> impl Strategy<Value = (u32, u32, u32)> {
    interval(depth).prop_flat_map(|(f, l)| (1..=l).prop_map(move |w| (w, f, l)))
}

fn instruction(max_depth: u32, max_ops: usize) -> impl Strategy<Value = InstructionSpec> {
    (2..=max_depth).prop_flat_map(move |depth| {
        (
            prop::collection::vec(source(depth), 0..=max_ops),
            prop::collection::vec(dest(depth), 0..=max_ops),
        )
            .prop_map(move |(srcs, dsts)| InstructionSpec {
                opcode: String::new(),
                depth,
                sources: srcs
                    .into_iter()
                    .enumerate()
                    .map(|(i, (read, first_needed, last_needed))| SourceOperand {
                        name: format!("s{}", i + 1),
                        read,
                        first_needed,
                        last_needed,
                    })
                    .collect(),
                dests: dsts
                    .into_iter()
                    .enumerate()
                    .map(|(i, (write, first_avail, last_avail))| DestOperand {
                        name: format!("d{}", i + 1),
                        write,
                        first_avail,
                        last_avail,
                    })
                    .collect(),
            })
    })
}

/// Small sets with a bias towards repeated timing so reductions merge.
fn instruction_set() -> impl Strategy<Value = InstructionSet> {
    (
        prop::collection::vec(instruction(6, 3), 1..=4),
        prop::collection::vec(any::<prop::sample::Index>(), 0..=2),
    )
        .prop_map(|(mut insts, dups)| {
            for idx in dups {
                let copy = insts[idx.index(insts.len())].clone();
                insts.push(copy);
            }
            for (i, inst) in insts.iter_mut().enumerate() {
                inst.opcode = format!("op{}", i + 1);
            }
            InstructionSet::new("prop", insts)
        })
}

fn as_set(records: &[HazardRecord]) -> HashSet<HazardRecord> {
    records.iter().cloned().collect()
}

fn binding_of(r: &HazardRecord) -> Binding {
    Binding::new(r.kind, &r.older.operand, &r.newer.operand)
}

fn with_cycles(r: &HazardRecord, cycles: u32) -> HazardRecord {
    HazardRecord {
        resolution: Resolution::Stall { cycles },
        ..r.clone()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generated_sets_are_valid(set in instruction_set()) {
        prop_assert!(!has_errors(&validate(&set)));
    }

    #[test]
    fn rules_match_oracle(set in instruction_set()) {
        for kind in HazardType::ALL {
            let rules = enumerate_all(&set, &[kind], false);
            let oracle = oracle_enumerate(&set, &[kind]);
            prop_assert_eq!(as_set(&rules), as_set(&oracle), "{}", kind);
            prop_assert_eq!(rules, oracle);
        }
    }

    #[test]
    fn reduction_is_sound(set in instruction_set()) {
        for kind in HazardType::ALL {
            prop_assert_eq!(
                enumerate_all(&set, &[kind], true),
                enumerate_all(&set, &[kind], false)
            );
        }
    }

    #[test]
    fn reduction_is_idempotent(set in instruction_set()) {
        for level in [ReductionLevel::Full, ReductionLevel::Raw, ReductionLevel::Write] {
            let reps = reduce(&set, level).representatives();
            let again = reduce(&reps, level);
            prop_assert_eq!(again.classes.len(), reps.instructions.len());
            prop_assert!(again.classes.iter().all(|c| c.members.len() == 1));
            prop_assert_eq!(again.representatives(), reps);
        }
    }

    #[test]
    fn classes_partition_and_agree_on_keys(set in instruction_set()) {
        for level in [ReductionLevel::Full, ReductionLevel::Raw, ReductionLevel::Write] {
            let reduced = reduce(&set, level);
            let mut seen: Vec<&str> = reduced.classes.iter().flat_map(|c| c.members.iter().map(String::as_str)).collect();
            seen.sort_unstable();
            let mut all: Vec<&str> = set.instructions.iter().map(|i| i.opcode.as_str()).collect();
            all.sort_unstable();
            prop_assert_eq!(seen, all);
            for class in &reduced.classes {
                for op_class in class.sources.iter() {
                    for (inst, name) in &op_class.members {
                        let s = set.get(inst).unwrap().source(name).unwrap();
                        prop_assert_eq!(&operand_key(Operand::Source(s), level), &op_class.key);
                    }
                }
                for op_class in class.dests.iter() {
                    for (inst, name) in &op_class.members {
                        let d = set.get(inst).unwrap().dest(name).unwrap();
                        prop_assert_eq!(&operand_key(Operand::Dest(d), level), &op_class.key);
                    }
                }
                let counted: usize = class.sources.iter().chain(&class.dests).map(|c| c.members.len()).sum();
                let expected: usize = class.members.iter().map(|m| {
                    let i = set.get(m).unwrap();
                    i.sources.len() + i.dests.len()
                }).sum();
                prop_assert_eq!(counted, expected);
            }
        }
    }

    #[test]
    fn full_refines_raw_and_write(set in instruction_set()) {
        let ops: Vec<Operand> = set.instructions.iter().flat_map(|i| {
            i.sources.iter().map(Operand::Source).chain(i.dests.iter().map(Operand::Dest))
        }).collect();
        for a in &ops {
            for b in &ops {
                let same_role = matches!((a, b), (Operand::Source(_), Operand::Source(_)) | (Operand::Dest(_), Operand::Dest(_)));
                if same_role && operand_key(*a, ReductionLevel::Full) == operand_key(*b, ReductionLevel::Full) {
                    prop_assert_eq!(operand_key(*a, ReductionLevel::Raw), operand_key(*b, ReductionLevel::Raw));
                    prop_assert_eq!(operand_key(*a, ReductionLevel::Write), operand_key(*b, ReductionLevel::Write));
                }
            }
        }
    }

    #[test]
    fn records_lie_on_coupled_sequences(set in instruction_set()) {
        for r in enumerate_all(&set, &HazardType::ALL, true) {
            let older = set.get(&r.older.inst).unwrap();
            let newer = set.get(&r.newer.inst).unwrap();
            prop_assert_eq!(r.gap, r.hazard_pair.older - r.hazard_pair.newer);
            let seq = coupled_sequence(older, newer, r.gap).unwrap();
            prop_assert!(seq.pairs.contains(&r.hazard_pair));
            prop_assert!(seq.pairs.contains(&r.apply_at));
            match r.resolution {
                Resolution::Stall { cycles } => {
                    prop_assert!(cycles >= 1);
                    prop_assert_eq!(r.apply_at, StagePair::new(1, r.gap + 1));
                    prop_assert_eq!(r.stalled.as_deref(), Some(r.newer.inst.as_str()));
                }
                Resolution::Forward { from, to } => {
                    prop_assert!(from > to);
                    prop_assert_eq!(r.apply_at, r.hazard_pair);
                    prop_assert!(r.stalled.is_none());
                }
            }
        }
    }

    #[test]
    fn raw_stalls_and_forwards_partition(producer in instruction(8, 3), consumer in instruction(8, 3)) {
        for d in &producer.dests {
            for s in &consumer.sources {
                let recs = raw_hazards(&producer, d, &consumer, s);
                let stalls: Vec<u32> = recs.iter().filter(|r| r.resolution.is_stall()).map(|r| r.hazard_pair.older).collect();
                let forwards: Vec<u32> = recs.iter().filter(|r| !r.resolution.is_stall()).map(|r| r.hazard_pair.older).collect();
                prop_assert!(stalls.iter().all(|k| !forwards.contains(k)));
                let mut union: Vec<u32> = stalls.iter().chain(&forwards).copied().collect();
                union.sort_unstable();
                let lo = s.last_needed + 1;
                let expected: Vec<u32> = if s.last_needed <= consumer.depth { (lo..=d.last_avail).collect() } else { vec![] };
                prop_assert_eq!(union, expected);
            }
        }
    }

    #[test]
    fn stall_counts_decrease_by_one(set in instruction_set()) {
        let recs = enumerate_all(&set, &HazardType::ALL, false);
        let mut by_case: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        for r in &recs {
            if let Resolution::Stall { cycles } = r.resolution {
                by_case.entry(format!("{} {}", r.kind, r.case().label())).or_default().push((r.hazard_pair.older, cycles));
            }
        }
        for stalls in by_case.values() {
            for w in stalls.windows(2) {
                prop_assert_eq!(w[1].0, w[0].0 + 1);
                prop_assert_eq!(w[1].1 + 1, w[0].1);
            }
        }
    }

    #[test]
    fn stall_replay_is_minimal(set in instruction_set()) {
        for r in enumerate_all(&set, &HazardType::ALL, true) {
            let older = set.get(&r.older.inst).unwrap();
            let newer = set.get(&r.newer.inst).unwrap();
            let binding = binding_of(&r);
            match r.resolution {
                Resolution::Stall { cycles } => {
                    let cleared = replay_with_resolution(older, newer, r.gap, &binding, &r).unwrap();
                    prop_assert!(!cleared.has_stall_event());
                    let short = replay_with_resolution(older, newer, r.gap, &binding, &with_cycles(&r, cycles - 1)).unwrap();
                    prop_assert!(short.has_stall_event());
                }
                Resolution::Forward { from, .. } => {
                    let d = older.dest(&r.older.operand).unwrap();
                    prop_assert!(d.first_avail <= from && from <= d.last_avail);
                    let t = replay_with_resolution(older, newer, r.gap, &binding, &r).unwrap();
                    prop_assert_eq!(t, simulate_pair(older, newer, r.gap, &binding).unwrap());
                }
            }
        }
    }

    #[test]
    fn unstalled_timeline_length(older in instruction(8, 1), newer in instruction(8, 1), gap in 1u32..8) {
        let mut older = older;
        older.dests = vec![DestOperand { name: "d".into(), write: 1, first_avail: 1, last_avail: 1 }];
        let mut newer = newer;
        newer.dests = vec![DestOperand { name: "d".into(), write: 1, first_avail: 1, last_avail: 1 }];
        let binding = Binding::new(HazardType::Waw, "d", "d");
        let t = simulate_pair(&older, &newer, gap, &binding).unwrap();
        let expected = newer.depth.min(older.depth.saturating_sub(gap)) as usize;
        prop_assert_eq!(t.co_resident().count(), expected);
        prop_assert_eq!(simulate_with_stalls(&older, &newer, gap, &binding, BTreeMap::new()).unwrap(), t);
    }

    #[test]
    fn isa_round_trip(set in instruction_set()) {
        let text = render_isa(&set);
        let parsed = parse_instruction_set(&text).unwrap();
        prop_assert_eq!(parsed.instructions, set.instructions);
        prop_assert_eq!(render_isa(&InstructionSet::new("prop", parse_instruction_set(&text).unwrap().instructions)), text);
    }

    #[test]
    fn csv_round_trip(set in instruction_set()) {
        let recs = enumerate_all(&set, &HazardType::ALL, true);
        prop_assert_eq!(import_csv(&export_csv(&recs)).unwrap(), recs);
    }
}
