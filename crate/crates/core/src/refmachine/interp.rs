//! Step-bounded interpreter on a two-way infinite tape (blank = 0).
//!
//! The initial tape is `data . condition` with the head on cell 0, the
//! first cell of the data (or of the condition when the data is empty).
//! The output is the final content of the smallest interval covering the
//! condition's initial cells and every cell where a transition executed.

use serde::{Deserialize, Serialize};

use super::program::{Move, Program, ProgramBits};
use crate::bits::Bits;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub halted: bool,
    pub steps: u64,
    pub output: Bits,
    /// Inclusive interval of cells where a transition executed.
    pub visited: Option<(i64, i64)>,
}

/// A machine configuration that can be advanced one transition at a time.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    tape: Vec<bool>,
    /// Cell index of `tape[0]`.
    origin: i64,
    pub head: i64,
    /// Current state; 0 once halted.
    pub state: u32,
    pub steps: u64,
    visited: Option<(i64, i64)>,
    cond: (i64, i64),
}

impl Config {
    pub fn initial(program: &Program, condition: &Bits) -> Self {
        let mut tape = Vec::with_capacity(program.data.len() + condition.len() + 16);
        tape.extend_from_slice(&program.data);
        tape.extend_from_slice(condition);
        let d = program.data.len() as i64;
        Config {
            tape,
            origin: 0,
            head: 0,
            state: 1,
            steps: 0,
            visited: None,
            cond: (d, d + condition.len() as i64),
        }
    }

    pub fn halted(&self) -> bool {
        self.state == 0
    }

    #[inline]
    pub fn read(&self, cell: i64) -> bool {
        let i = cell - self.origin;
        i >= 0 && (i as usize) < self.tape.len() && self.tape[i as usize]
    }

    fn write(&mut self, cell: i64, v: bool) {
        let mut i = cell - self.origin;
        if i < 0 {
            let grow = (-i) as usize + self.tape.len().max(8);
            let mut t = vec![false; grow];
            t.extend_from_slice(&self.tape);
            self.tape = t;
            self.origin -= grow as i64;
            i = cell - self.origin;
        }
        let i = i as usize;
        if i >= self.tape.len() {
            if !v {
                return;
            }
            let new_len = (i + 1).max(self.tape.len() * 2);
            self.tape.resize(new_len, false);
        }
        self.tape[i] = v;
    }

    /// Executes one transition. No-op once halted.
    #[inline]
    pub fn step(&mut self, program: &Program) {
        if self.halted() {
            return;
        }
        let sym = self.read(self.head);
        let e = program.spec.entry(self.state, sym);
        if e.write != sym {
            self.write(self.head, e.write);
        }
        self.visited = Some(match self.visited {
            None => (self.head, self.head),
            Some((lo, hi)) => (lo.min(self.head), hi.max(self.head)),
        });
        self.head += match e.mv {
            Move::Left => -1,
            Move::Right => 1,
        };
        self.state = e.next;
        self.steps += 1;
    }

    pub fn visited(&self) -> Option<(i64, i64)> {
        self.visited
    }

    pub fn output_window(&self) -> Option<(i64, i64)> {
        let cond = (self.cond.0 < self.cond.1).then(|| (self.cond.0, self.cond.1 - 1));
        match (cond, self.visited) {
            (None, None) => None,
            (Some(w), None) | (None, Some(w)) => Some(w),
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
        }
    }

    pub fn output(&self) -> Bits {
        match self.output_window() {
            None => Bits::new(),
            Some((lo, hi)) => (lo..=hi).map(|c| self.read(c)).collect(),
        }
    }

    pub fn into_result(self) -> RunResult {
        RunResult {
            halted: self.halted(),
            steps: self.steps,
            output: self.output(),
            visited: self.visited,
        }
    }
}

pub fn run(program: &Program, condition: &Bits, step_budget: u64) -> RunResult {
    let mut cfg = Config::initial(program, condition);
    while !cfg.halted() && cfg.steps < step_budget {
        cfg.step(program);
    }
    cfg.into_result()
}

/// Decodes and runs; undecodable programs are an `EncodingError`.
pub fn run_bits(program: &ProgramBits, condition: &Bits, step_budget: u64) -> Result<RunResult> {
    let p = program.decode()?;
    Ok(run(&p, condition, step_budget))
}
