//! Reference-machine programs compiled into finite dynamical systems.
//!
//! A state is a full interpreter configuration over a bounded tape window
//! plus an input register. Each step is one transition; a halting
//! transition enters a halted configuration, and the step after that
//! re-enters the initial configuration for the register's input, so the
//! system repeats its simulation cycle forever.
//!
//! State layout (bit fields, most significant bit first):
//! `input length | input register | machine state | head | visited flag |
//! visited lo | visited hi | tape window`.

use serde::{Deserialize, Serialize};

use super::{Fddds, Trajectory};
use crate::bits::Bits;
use crate::error::{LabError, Result};
use crate::refmachine::codec::{gamma_len, push_gamma};
use crate::refmachine::program::next_field_bits;
use crate::refmachine::{Move, Program, ProgramBits};

/// How the input register becomes the machine's condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputFrame {
    /// The condition is the input itself.
    Raw,
    /// The condition is the pair `<input, suffix>`, e.g. first tape plus a
    /// fixed knowledge base on the second tape.
    Paired(Bits),
}

impl InputFrame {
    pub fn condition(&self, input: &Bits) -> Bits {
        match self {
            InputFrame::Raw => input.clone(),
            InputFrame::Paired(suffix) => {
                let mut c = Bits::with_capacity(input.len() + suffix.len() + 16);
                push_gamma(&mut c, input.len() as u64 + 1);
                c.extend_bits(input);
                c.extend_bits(suffix);
                c
            }
        }
    }

    fn condition_len(&self, input_len: usize) -> usize {
        match self {
            InputFrame::Raw => input_len,
            InputFrame::Paired(s) => gamma_len(input_len as u64 + 1) + input_len + s.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompiledTm {
    pub program: Program,
    pub frame: InputFrame,
    pub input_cap: usize,
    pub budget: u64,
    len_bits: usize,
    q_bits: usize,
    head_bits: usize,
    window: usize,
}

/// Decoded form of a compiled state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmState {
    pub input: Bits,
    pub q: u32,
    pub head: usize,
    pub visited: Option<(usize, usize)>,
    pub tape: Bits,
}

/// Bits needed to store every value in `0..=max`.
fn width_for(max: usize) -> usize {
    next_field_bits(max as u32).max(1)
}

pub fn compile_tm_to_fddds(program: &ProgramBits, input_cap: usize, budget: u64) -> Result<CompiledTm> {
    CompiledTm::new(program.decode()?, InputFrame::Raw, input_cap, budget)
}

impl CompiledTm {
    pub fn new(program: Program, frame: InputFrame, input_cap: usize, budget: u64) -> Result<Self> {
        program.spec.validate()?;
        let cond_cap = frame.condition_len(input_cap);
        let window = program.data.len() + cond_cap + 2 * budget as usize + 1;
        Ok(CompiledTm {
            len_bits: width_for(input_cap),
            q_bits: next_field_bits(program.spec.states),
            head_bits: width_for(window - 1),
            window,
            program,
            frame,
            input_cap,
            budget,
        })
    }

    /// Window index of tape cell 0.
    fn origin(&self) -> usize {
        self.budget as usize
    }

    pub fn window(&self) -> usize {
        self.window
    }

    fn cond_interval(&self, input_len: usize) -> (usize, usize) {
        let a = self.origin() + self.program.data.len();
        (a, a + self.frame.condition_len(input_len))
    }

    pub fn initial_state(&self, input: &Bits) -> Result<Bits> {
        if input.len() > self.input_cap {
            return Err(LabError::Domain(format!(
                "input of {} bits exceeds register capacity {}",
                input.len(),
                self.input_cap
            )));
        }
        Ok(self.encode_state(&self.initial(input)))
    }

    fn initial(&self, input: &Bits) -> TmState {
        let mut tape = Bits::zeros(self.window);
        let o = self.origin();
        let d = &self.program.data;
        tape[o..o + d.len()].copy_from_slice(d);
        let cond = self.frame.condition(input);
        tape[o + d.len()..o + d.len() + cond.len()].copy_from_slice(&cond);
        TmState {
            input: input.clone(),
            q: 1,
            head: o,
            visited: None,
            tape,
        }
    }

    pub fn encode_state(&self, st: &TmState) -> Bits {
        let mut out = Bits::with_capacity(self.state_width());
        out.extend_bits(&Bits::from_uint(st.input.len() as u64, self.len_bits));
        out.extend_bits(&st.input);
        out.extend(std::iter::repeat_n(false, self.input_cap - st.input.len()));
        out.extend_bits(&Bits::from_uint(st.q as u64, self.q_bits));
        out.extend_bits(&Bits::from_uint(st.head as u64, self.head_bits));
        let (flag, lo, hi) = match st.visited {
            Some((lo, hi)) => (true, lo, hi),
            None => (false, 0, 0),
        };
        out.push(flag);
        out.extend_bits(&Bits::from_uint(lo as u64, self.head_bits));
        out.extend_bits(&Bits::from_uint(hi as u64, self.head_bits));
        out.extend_bits(&st.tape);
        out
    }

    pub fn decode_state(&self, s: &Bits) -> TmState {
        let mut pos = 0usize;
        let mut field = |w: usize| {
            let v = Bits::from(&s[pos..pos + w]);
            pos += w;
            v
        };
        let len = (field(self.len_bits).to_uint().unwrap_or(u64::MAX) as usize).min(self.input_cap);
        let reg = field(self.input_cap);
        let q = field(self.q_bits).to_uint().unwrap_or(u64::MAX) as u32;
        let head = field(self.head_bits).to_uint().unwrap_or(u64::MAX) as usize;
        let flag = field(1)[0];
        let lo = field(self.head_bits).to_uint().unwrap_or(u64::MAX) as usize;
        let hi = field(self.head_bits).to_uint().unwrap_or(u64::MAX) as usize;
        let tape = field(self.window);
        TmState {
            input: reg.slice(0, len),
            q: q.min(self.program.spec.states),
            head: head.min(self.window - 1),
            visited: flag.then_some((lo.min(self.window - 1), hi.min(self.window - 1))),
            tape,
        }
    }

    pub fn is_halted(&self, state: &Bits) -> bool {
        self.decode_state(state).q == 0
    }

    pub fn input_of(&self, state: &Bits) -> Bits {
        self.decode_state(state).input
    }

    /// The interpreter output of a halted configuration.
    pub fn output(&self, state: &Bits) -> Option<Bits> {
        let st = self.decode_state(state);
        if st.q != 0 {
            return None;
        }
        let (ca, cb) = self.cond_interval(st.input.len());
        let cond = (ca < cb).then_some((ca, cb - 1));
        let (lo, hi) = match (cond, st.visited) {
            (None, None) => return Some(Bits::new()),
            (Some(w), None) | (None, Some(w)) => w,
            (Some((a, b)), Some((c, d))) => (a.min(c), b.max(d)),
        };
        Some(st.tape.slice(lo, hi + 1))
    }

    /// `(t, output)` for every halted configuration in a trajectory of this
    /// system.
    pub fn cycle_outputs(&self, traj: &Trajectory) -> Vec<(u64, Bits)> {
        traj.states
            .iter()
            .enumerate()
            .filter_map(|(i, s)| self.output(s).map(|o| (traj.start + i as u64, o)))
            .collect()
    }

    fn transition(&self, mut st: TmState) -> TmState {
        if st.q == 0 {
            return self.initial(&st.input);
        }
        let sym = st.tape[st.head];
        let e = self.program.spec.entry(st.q, sym);
        let next_head = match e.mv {
            Move::Left => st.head.checked_sub(1),
            Move::Right => Some(st.head + 1).filter(|&h| h < self.window),
        };
        // leaving the window freezes the configuration
        let Some(next_head) = next_head else {
            return st;
        };
        st.tape[st.head] = e.write;
        st.visited = Some(match st.visited {
            None => (st.head, st.head),
            Some((lo, hi)) => (lo.min(st.head), hi.max(st.head)),
        });
        st.head = next_head;
        st.q = e.next;
        st
    }
}

impl Fddds for CompiledTm {
    fn id(&self) -> String {
        format!(
            "compiled-tm(program={},cap={},budget={})",
            self.program.encode(),
            self.input_cap,
            self.budget
        )
    }

    fn state_width(&self) -> usize {
        self.len_bits + self.input_cap + self.q_bits + 1 + 3 * self.head_bits + self.window
    }

    fn advance(&self, state: &Bits, _env: &Bits, _t: u64) -> Bits {
        self.encode_state(&self.transition(self.decode_state(state)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{recurrence_time, trajectory, Environment};
    use crate::refmachine::{copy_program, run, sample_program};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn copy_program_cycles_with_period_two() {
        let sys = CompiledTm::new(copy_program(), InputFrame::Raw, 4, 4).unwrap();
        let s0 = sys.initial_state(&Bits::lit("101")).unwrap();
        assert_eq!(recurrence_time(&sys, &s0, &Bits::new()).unwrap(), (0, 2));
        let s1 = sys.step(&s0, &Bits::new(), 0).unwrap();
        assert_eq!(sys.output(&s1).unwrap().to_string(), "101");
    }

    #[test]
    fn compiled_output_matches_interpreter_on_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let budget = 40u64;
        let mut checked = 0;
        while checked < 50 {
            let p = sample_program(&mut rng, 3).decode().unwrap();
            if p.data.len() > 6 {
                continue;
            }
            let n = rng.gen_range(0..6);
            let w: Bits = (0..n).map(|_| rng.gen::<bool>()).collect();
            let r = run(&p, &w, budget);
            if !r.halted {
                continue;
            }
            let sys = CompiledTm::new(p.clone(), InputFrame::Raw, 6, budget).unwrap();
            let s0 = sys.initial_state(&w).unwrap();
            let tr = trajectory(&sys, &s0, &Environment::none(), 0, budget + 1).unwrap();
            let outs = sys.cycle_outputs(&tr);
            assert_eq!(outs[0], (r.steps, r.output.clone()), "program {}", p.encode());
            checked += 1;
        }
    }

    #[test]
    fn paired_frame_matches_interpreter() {
        let p = copy_program();
        let suffix = Bits::lit("0110");
        let sys = CompiledTm::new(p.clone(), InputFrame::Paired(suffix.clone()), 5, 3).unwrap();
        let w = Bits::lit("11");
        let s1 = sys.step(&sys.initial_state(&w).unwrap(), &Bits::new(), 0).unwrap();
        let cond = InputFrame::Paired(suffix).condition(&w);
        assert_eq!(sys.output(&s1).unwrap(), run(&p, &cond, 3).output);
    }

    #[test]
    fn non_halting_program_emits_no_boundary() {
        use crate::refmachine::{Entry, TmSpec};
        // moves right forever
        let spec = TmSpec::new(1, vec![Entry::new(false, Move::Right, 1); 2]).unwrap();
        let sys = CompiledTm::new(Program::new(spec, Bits::new()), InputFrame::Raw, 2, 10).unwrap();
        let s0 = sys.initial_state(&Bits::lit("1")).unwrap();
        let tr = trajectory(&sys, &s0, &Environment::none(), 0, 10).unwrap();
        assert!(sys.cycle_outputs(&tr).is_empty());
    }

    #[test]
    fn oversize_input_is_rejected() {
        let sys = CompiledTm::new(copy_program(), InputFrame::Raw, 2, 2).unwrap();
        assert!(sys.initial_state(&Bits::lit("101")).is_err());
        let bad = ProgramBits(Bits::lit("1010"));
        assert!(matches!(compile_tm_to_fddds(&bad, 2, 2), Err(LabError::Encoding(_))));
    }
}
