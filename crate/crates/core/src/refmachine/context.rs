//! Conditioning on tuples.
//!
//! A conditional description `K(z | <a, b, ...>)` may use any component of
//! the tuple. For the small reference machine, locating a component inside
//! the left-folded pair encoding is far beyond a 2-state table, so the
//! conditional machine reads a short selector first:
//!
//! ```text
//! gamma(i+1)            i = 0: the whole encoded tuple is the condition
//! gamma(i+1) . dir      i >= 1: component i counted from the front
//!                       (dir = 0) or from the back (dir = 1)
//! ```
//!
//! followed by an ordinary program, which then runs with the selected
//! component as its condition. The selector is itself prefix-free, so
//! addressed programs remain a prefix-free set; its length is the
//! "locate" cost reported alongside conditional estimates.

use serde::{Deserialize, Serialize};

use super::codec::{gamma_len, push_gamma, tuple_encode, BitSource, Cursor};
use super::interp::{run, RunResult};
use super::program::{decode_prefix, entry_bits, next_field_bits, Program, ProgramBits};
use crate::bits::Bits;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    pub components: Vec<Bits>,
}

impl Context {
    pub fn new(components: Vec<Bits>) -> Self {
        Context { components }
    }

    pub fn single(w: Bits) -> Self {
        Context { components: vec![w] }
    }

    /// Canonical flat encoding: the left fold of the pairing function.
    pub fn encode(&self) -> Bits {
        tuple_encode(&self.components)
    }

    pub fn select(&self, sel: Selector) -> Option<Bits> {
        let n = self.components.len();
        match sel {
            Selector::Whole => Some(self.encode()),
            Selector::Front(i) if i >= 1 && i <= n => Some(self.components[i - 1].clone()),
            Selector::Back(i) if i >= 1 && i <= n => Some(self.components[n - i].clone()),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Selector {
    Whole,
    /// 1-based index from the front.
    Front(usize),
    /// 1-based index from the back; `Back(1)` is the last component.
    Back(usize),
}

impl Selector {
    pub fn encoded_len(&self) -> usize {
        match *self {
            Selector::Whole => 1,
            Selector::Front(i) | Selector::Back(i) => gamma_len(i as u64 + 1) + 1,
        }
    }

    pub fn push(&self, out: &mut Bits) {
        match *self {
            Selector::Whole => push_gamma(out, 1),
            Selector::Front(i) => {
                push_gamma(out, i as u64 + 1);
                out.push(false);
            }
            Selector::Back(i) => {
                push_gamma(out, i as u64 + 1);
                out.push(true);
            }
        }
    }

    /// All selectors addressing an `n`-component context, in code order.
    pub fn all(n: usize) -> Vec<Selector> {
        let mut v = vec![Selector::Whole];
        for i in 1..=n {
            v.push(Selector::Front(i));
            v.push(Selector::Back(i));
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressedProgram {
    pub selector: Selector,
    pub program: Program,
}

impl AddressedProgram {
    pub fn encode(&self) -> Bits {
        let mut out = Bits::new();
        self.selector.push(&mut out);
        out.extend_bits(&self.program.encode().0);
        out
    }

    pub fn decode(bits: &[bool]) -> Option<AddressedProgram> {
        let mut c = Cursor::new(bits);
        let i = c.read_gamma().ok()?? - 1;
        let selector = if i == 0 {
            Selector::Whole
        } else if c.next_bit()? {
            Selector::Back(i as usize)
        } else {
            Selector::Front(i as usize)
        };
        let rest = c.rest();
        let (program, used) = decode_prefix(rest).ok()?;
        (used == rest.len()).then_some(AddressedProgram { selector, program })
    }

    pub fn run(&self, ctx: &Context, step_budget: u64) -> Option<RunResult> {
        let cond = ctx.select(self.selector)?;
        Some(run(&self.program, &cond, step_budget))
    }
}

/// All valid programs of exactly `len` bits, sorted lexicographically.
pub fn programs_of_length(len: usize) -> Vec<ProgramBits> {
    let mut out = Vec::new();
    let mut s = 1u32;
    loop {
        let header = gamma_len(s as u64) + 2 * s as usize * entry_bits(s);
        if header + 1 > len {
            break;
        }
        let rest = len - header;
        // gamma_len(m+1) + m is strictly increasing, so at most one m fits
        let Some(m) = (0..=rest).find(|&m| gamma_len(m as u64 + 1) + m == rest) else {
            s += 1;
            continue;
        };
        let base = 4 * (s as u64 + 1);
        let n_tables = base.pow(2 * s);
        let nb = next_field_bits(s);
        for idx in 0..n_tables {
            let spec = super::program::TmSpec::from_index(s, idx);
            let mut head = Bits::with_capacity(len);
            push_gamma(&mut head, s as u64);
            for e in &spec.table {
                head.push(e.write);
                head.push(matches!(e.mv, super::program::Move::Right));
                for i in (0..nb).rev() {
                    head.push((e.next >> i) & 1 == 1);
                }
            }
            push_gamma(&mut head, m as u64 + 1);
            for data in 0..(1u64 << m) {
                let mut bits = head.clone();
                bits.extend_bits(&Bits::from_uint(data, m));
                out.push(ProgramBits(bits));
            }
        }
        s += 1;
    }
    out.sort();
    out
}

/// All addressed programs of exactly `len` bits over an `n`-component
/// context, sorted lexicographically.
pub fn addressed_programs_of_length(len: usize, n: usize) -> Vec<Bits> {
    let mut out = Vec::new();
    for sel in Selector::all(n) {
        let sl = sel.encoded_len();
        if sl >= len {
            continue;
        }
        let mut prefix = Bits::new();
        sel.push(&mut prefix);
        for p in programs_of_length(len - sl) {
            let mut b = prefix.clone();
            b.extend_bits(&p.0);
            out.push(b);
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refmachine::program::copy_program;

    #[test]
    fn selector_codes() {
        let mut b = Bits::new();
        Selector::Back(1).push(&mut b);
        assert_eq!(b.to_string(), "0101");
        assert_eq!(Selector::Back(1).encoded_len(), 4);
        assert_eq!(Selector::Whole.encoded_len(), 1);
    }

    #[test]
    fn addressed_copy_extracts_a_component() {
        let ctx = Context::new(vec![Bits::lit("1101"), Bits::lit("000111")]);
        let ap = AddressedProgram {
            selector: Selector::Front(1),
            program: copy_program(),
        };
        let bits = ap.encode();
        assert_eq!(bits.len(), 12);
        let back = AddressedProgram::decode(&bits).unwrap();
        assert_eq!(back, ap);
        assert_eq!(back.run(&ctx, 10).unwrap().output.to_string(), "1101");
        let last = AddressedProgram {
            selector: Selector::Back(1),
            program: copy_program(),
        };
        assert_eq!(last.run(&ctx, 10).unwrap().output.to_string(), "000111");
        let out_of_range = AddressedProgram {
            selector: Selector::Front(3),
            program: copy_program(),
        };
        assert!(out_of_range.run(&ctx, 10).is_none());
    }

    #[test]
    fn program_counts_by_length() {
        assert!(programs_of_length(7).is_empty());
        assert_eq!(programs_of_length(8).len(), 64);
        // s = 1 with one data bit: 7 + gamma(2) + 1 = 11
        assert_eq!(programs_of_length(11).len(), 128);
        for p in programs_of_length(12) {
            assert!(ProgramBits::is_valid(&p.0));
        }
    }
}
