//! Exhaustive enumeration of `(s, 2)` transition tables.
//!
//! Every table is run unconditionally (empty data, empty condition). Work is
//! split into contiguous index ranges; per-range results are merged with an
//! associative, order-independent fold so the worker count never changes the
//! result.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::interp::{run, RunResult};
use super::program::{Program, TmSpec};
use crate::bits::Bits;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationSummary {
    pub states: u32,
    pub step_budget: u64,
    pub machines: u64,
    pub halters: u64,
    pub max_steps: u64,
    pub max_ones: usize,
}

impl EnumerationSummary {
    fn merge(mut self, other: Self) -> Self {
        self.machines += other.machines;
        self.halters += other.halters;
        self.max_steps = self.max_steps.max(other.max_steps);
        self.max_ones = self.max_ones.max(other.max_ones);
        self
    }
}

const CHUNK: u64 = 4096;

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is `None`.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
    }
}

/// Map-reduce over all tables with `s` states.
pub fn fold_machines<A, F, M>(
    s: u32,
    step_budget: u64,
    workers: Option<usize>,
    init: impl Fn() -> A + Sync + Send,
    visit: F,
    merge: M,
) -> A
where
    A: Send,
    F: Fn(&mut A, u64, &TmSpec, &RunResult) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let total = TmSpec::space_size(s);
    let chunks = total.div_ceil(CHUNK);
    with_workers(workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                let mut prog = Program::new(TmSpec::from_index(s, 0), Bits::new());
                for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    prog.spec = TmSpec::from_index(s, idx);
                    let r = run(&prog, &Bits::new(), step_budget);
                    visit(&mut acc, idx, &prog.spec, &r);
                }
                acc
            })
            .reduce(&init, &merge)
    })
}

/// Visits every table with `s` states exactly once and summarizes the
/// halting behaviour. The visitor may be called from several threads.
pub fn enumerate_machines<V>(s: u32, step_budget: u64, workers: Option<usize>, visitor: V) -> EnumerationSummary
where
    V: Fn(u64, &TmSpec, &RunResult) + Sync + Send,
{
    assert!(s >= 1, "state count must be positive");
    let base = EnumerationSummary {
        states: s,
        step_budget,
        ..Default::default()
    };
    fold_machines(
        s,
        step_budget,
        workers,
        EnumerationSummary::default,
        |acc, idx, spec, r| {
            visitor(idx, spec, r);
            acc.machines += 1;
            if r.halted {
                acc.halters += 1;
                acc.max_steps = acc.max_steps.max(r.steps);
                acc.max_ones = acc.max_ones.max(r.output.count_ones());
            }
        },
        EnumerationSummary::merge,
    )
    .merge(base)
}
