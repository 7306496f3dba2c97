//! Cross-checks the closed-form rules against the simulation oracle.

use std::collections::HashSet;
use std::fmt;

use crate::isa::InstructionSet;
use crate::record::{HazardRecord, HazardType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Emitted by the rules only.
    RulesOnly,
    /// Emitted by the oracle only.
    OracleOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub side: Side,
    pub record: HazardRecord,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::RulesOnly => "rules only ",
            Side::OracleOnly => "oracle only",
        };
        let r = &self.record;
        write!(
            f,
            "{side}: {} case {} at {} gap {}: {}",
            r.kind,
            r.case().label(),
            r.hazard_pair,
            r.gap,
            match r.resolution {
                crate::record::Resolution::Forward { from, to } =>
                    format!("forward {from} -> {to}"),
                crate::record::Resolution::Stall { cycles } => {
                    format!("stall {cycles} applied at {}", r.apply_at)
                }
            }
        )
    }
}

/// Records present in one list but not the other. Both lists are expected
/// in canonical order; the result keeps that order, rules side first.
pub fn diff(rules: &[HazardRecord], oracle: &[HazardRecord]) -> Vec<Mismatch> {
    let rule_set: HashSet<&HazardRecord> = rules.iter().collect();
    let oracle_set: HashSet<&HazardRecord> = oracle.iter().collect();
    let mut out: Vec<Mismatch> = rules
        .iter()
        .filter(|r| !oracle_set.contains(r))
        .map(|r| Mismatch {
            side: Side::RulesOnly,
            record: r.clone(),
        })
        .collect();
    out.extend(
        oracle
            .iter()
            .filter(|r| !rule_set.contains(r))
            .map(|r| Mismatch {
                side: Side::OracleOnly,
                record: r.clone(),
            }),
    );
    out
}

/// Runs `rules` and the oracle on `set` and reports every disagreement.
pub fn verify_set<F>(set: &InstructionSet, types: &[HazardType], rules: F) -> Vec<Mismatch>
where
    F: Fn(&InstructionSet, &[HazardType]) -> Vec<HazardRecord>,
{
    let expected = crate::simulate::oracle_enumerate(set, types);
    diff(&rules(set, types), &expected)
}
