//! Coding-theorem frequency tables: `K(x) ~ -log2 m(x)` with `m` replaced
//! by halting-output frequencies over an exhaustively enumerated machine
//! space.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AicEstimate, EstimateMethod};
use crate::bits::Bits;
use crate::error::{LabError, Result};
use crate::refmachine::enumerate::fold_machines;
use crate::refmachine::TmSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtmTable {
    pub states: u32,
    pub step_budget: u64,
    pub machines: u64,
    pub halters: u64,
    pub records: BTreeMap<Bits, u64>,
}

#[derive(Default)]
struct Partial {
    machines: u64,
    halters: u64,
    records: BTreeMap<Bits, u64>,
}

fn merge(mut a: Partial, b: Partial) -> Partial {
    a.machines += b.machines;
    a.halters += b.halters;
    for (k, v) in b.records {
        *a.records.entry(k).or_insert(0) += v;
    }
    a
}

pub fn ctm_build(s: u32, step_budget: u64, workers: Option<usize>) -> CtmTable {
    let p = fold_machines(
        s,
        step_budget,
        workers,
        Partial::default,
        |acc, _, _: &TmSpec, r| {
            acc.machines += 1;
            if r.halted {
                acc.halters += 1;
                *acc.records.entry(r.output.clone()).or_insert(0) += 1;
            }
        },
        merge,
    );
    CtmTable {
        states: s,
        step_budget,
        machines: p.machines,
        halters: p.halters,
        records: p.records,
    }
}

impl CtmTable {
    pub fn count(&self, x: &Bits) -> Option<u64> {
        self.records.get(x).copied()
    }

    pub fn ctm_k(&self, x: &Bits) -> Result<AicEstimate> {
        let c = self.count(x).ok_or_else(|| LabError::NotCovered(x.to_string()))?;
        let k = -((c as f64) / (self.halters as f64)).log2();
        Ok(AicEstimate::point(k, EstimateMethod::Ctm).with_resources(self.step_budget, None))
    }

    /// Records sorted by descending count, ties by output order.
    pub fn ranked(&self) -> Vec<(&Bits, u64)> {
        let mut v: Vec<_> = self.records.iter().map(|(k, &c)| (k, c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn header(&self) -> String {
        format!(
            "ctm,s={},budget={},machines={},halters={}",
            self.states, self.step_budget, self.machines, self.halters
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = self.header();
        s.push('\n');
        for (k, c) in &self.records {
            writeln!(s, "{k},{c}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<CtmTable> {
        let bad = |m: &str| LabError::Encoding(format!("ctm cache: {m}"));
        let mut lines = text.lines();
        let head = lines.next().ok_or_else(|| bad("empty file"))?;
        let mut fields = head.split(',');
        if fields.next() != Some("ctm") {
            return Err(bad("missing ctm tag"));
        }
        let mut get = |name: &str| -> Result<u64> {
            let f = fields.next().ok_or_else(|| bad("short header"))?;
            let v = f
                .strip_prefix(name)
                .and_then(|v| v.strip_prefix('='))
                .ok_or_else(|| bad(&format!("expected {name}=")))?;
            v.parse().map_err(|_| bad(&format!("bad {name}")))
        };
        let states = get("s")? as u32;
        let step_budget = get("budget")?;
        let machines = get("machines")?;
        let halters = get("halters")?;
        let mut records = BTreeMap::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let (k, c) = line.rsplit_once(',').ok_or_else(|| bad("record without count"))?;
            let c: u64 = c.parse().map_err(|_| bad("bad count"))?;
            records.insert(k.parse::<Bits>()?, c);
        }
        let sum: u64 = records.values().sum();
        if sum != halters || halters > machines {
            return Err(bad("counts inconsistent with header"));
        }
        Ok(CtmTable {
            states,
            step_budget,
            machines,
            halters,
            records,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_state_table_covers_single_bits() {
        let t = ctm_build(1, 100, None);
        assert_eq!(t.machines, 64);
        assert!(t.count(&Bits::lit("0")).is_some());
        assert!(t.count(&Bits::lit("1")).is_some());
        assert_eq!(t.records.values().sum::<u64>(), t.halters);
    }

    #[test]
    fn text_roundtrip_and_corruption() {
        let t = ctm_build(1, 100, None);
        let text = t.to_text();
        assert_eq!(CtmTable::from_text(&text).unwrap(), t);
        let corrupted = text.replacen(",32\n", ",31\n", 1);
        if corrupted != text {
            assert!(CtmTable::from_text(&corrupted).is_err());
        }
        assert!(CtmTable::from_text("nope").is_err());
    }

    #[test]
    fn absent_string_is_not_covered() {
        let t = ctm_build(1, 100, None);
        let x = Bits::lit("0110100110010110011010011001011001101001100101100110100110010110");
        assert!(matches!(t.ctm_k(&x), Err(LabError::NotCovered(_))));
    }
}
