use std::fmt;

use serde::{Deserialize, Serialize};

use super::codec::{gamma_len, push_gamma, BitSource, Cursor};
use crate::bits::Bits;
use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Left,
    Right,
}

/// One transition: write a bit, move the head, go to `next` (0 halts).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub write: bool,
    pub mv: Move,
    pub next: u32,
}

impl Entry {
    pub const fn new(write: bool, mv: Move, next: u32) -> Self {
        Entry { write, mv, next }
    }

    /// Digit in `0..4(s+1)` used by the enumerator.
    pub fn digit(&self) -> u64 {
        (self.next as u64) * 4 + (matches!(self.mv, Move::Right) as u64) * 2 + self.write as u64
    }

    pub fn from_digit(d: u64) -> Self {
        Entry {
            write: d & 1 == 1,
            mv: if (d >> 1) & 1 == 1 { Move::Right } else { Move::Left },
            next: (d >> 2) as u32,
        }
    }
}

/// A two-symbol transition table with `states` states. Entry
/// `2*(q-1) + r` is the transition for state `q` reading `r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TmSpec {
    pub states: u32,
    pub table: Vec<Entry>,
}

impl TmSpec {
    pub fn new(states: u32, table: Vec<Entry>) -> Result<Self> {
        let spec = TmSpec { states, table };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.states == 0 {
            return Err(LabError::Domain("machine needs at least one state".into()));
        }
        if self.table.len() != 2 * self.states as usize {
            return Err(LabError::Domain(format!(
                "table has {} entries, expected {}",
                self.table.len(),
                2 * self.states
            )));
        }
        if let Some(e) = self.table.iter().find(|e| e.next > self.states) {
            return Err(LabError::Domain(format!(
                "next state {} exceeds state count {}",
                e.next, self.states
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn entry(&self, state: u32, read: bool) -> Entry {
        self.table[2 * (state as usize - 1) + read as usize]
    }

    /// Number of distinct tables with `s` states: `(4(s+1))^(2s)`.
    pub fn space_size(s: u32) -> u64 {
        (4 * (s as u64 + 1)).pow(2 * s)
    }

    /// Mixed-radix decoding of an enumeration index; entry 0 is the most
    /// significant digit so index order is lexicographic in the table.
    pub fn from_index(s: u32, mut index: u64) -> TmSpec {
        let base = 4 * (s as u64 + 1);
        let n = 2 * s as usize;
        let mut table = vec![Entry::new(false, Move::Left, 0); n];
        for slot in table.iter_mut().rev() {
            *slot = Entry::from_digit(index % base);
            index /= base;
        }
        TmSpec { states: s, table }
    }

    pub fn index(&self) -> u64 {
        let base = 4 * (self.states as u64 + 1);
        self.table.iter().fold(0, |acc, e| acc * base + e.digit())
    }
}

/// Width of the next-state field: `ceil(log2(s+1))`.
pub fn next_field_bits(s: u32) -> usize {
    let v = s as u64 + 1;
    (64 - (v - 1).leading_zeros()) as usize
}

pub fn entry_bits(s: u32) -> usize {
    2 + next_field_bits(s)
}

/// A decoded program: a machine plus its data payload.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Program {
    pub spec: TmSpec,
    pub data: Bits,
}

/// The self-delimiting encoding
/// `gamma(s) . table . gamma(|d|+1) . d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProgramBits(pub Bits);

impl fmt::Debug for ProgramBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProgramBits(\"{}\")", self.0)
    }
}

impl fmt::Display for ProgramBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Program {
    pub fn new(spec: TmSpec, data: Bits) -> Self {
        Program { spec, data }
    }

    pub fn encoded_len(&self) -> usize {
        let s = self.spec.states;
        gamma_len(s as u64) + 2 * s as usize * entry_bits(s) + gamma_len(self.data.len() as u64 + 1) + self.data.len()
    }

    pub fn encode(&self) -> ProgramBits {
        let s = self.spec.states;
        let nb = next_field_bits(s);
        let mut out = Bits::with_capacity(self.encoded_len());
        push_gamma(&mut out, s as u64);
        for e in &self.spec.table {
            out.push(e.write);
            out.push(matches!(e.mv, Move::Right));
            for i in (0..nb).rev() {
                out.push((e.next >> i) & 1 == 1);
            }
        }
        push_gamma(&mut out, self.data.len() as u64 + 1);
        out.extend_bits(&self.data);
        ProgramBits(out)
    }
}

/// Outcome of pulling one program from a bit source.
pub(crate) enum Pull {
    Done(Program),
    /// The source ran dry mid-program.
    Truncated,
    /// A complete header decoded to something that is not a program.
    Invalid(String),
    /// `s` exceeded the caller's cap; nothing after `gamma(s)` was read.
    TooManyStates,
}

pub(crate) fn pull_program<S: BitSource>(src: &mut S, s_max: Option<u32>) -> Result<Pull> {
    let Some(s) = src.read_gamma()? else {
        return Ok(Pull::Truncated);
    };
    if let Some(cap) = s_max {
        if s > cap as u64 {
            return Ok(Pull::TooManyStates);
        }
    }
    if s > u32::MAX as u64 / 2 {
        return Ok(Pull::Invalid(format!("state count {s} out of range")));
    }
    let s = s as u32;
    let nb = next_field_bits(s);
    let mut table = Vec::with_capacity((2 * s as usize).min(4096));
    for _ in 0..2 * s {
        let (Some(write), Some(right), Some(next)) = (src.next_bit(), src.next_bit(), src.read_uint(nb)) else {
            return Ok(Pull::Truncated);
        };
        if next > s as u64 {
            return Ok(Pull::Invalid(format!("next state {next} exceeds {s}")));
        }
        let mv = if right { Move::Right } else { Move::Left };
        table.push(Entry::new(write, mv, next as u32));
    }
    let Some(dlen) = src.read_gamma()? else {
        return Ok(Pull::Truncated);
    };
    let dlen = dlen - 1;
    let mut data = Bits::with_capacity((dlen as usize).min(1 << 16));
    for _ in 0..dlen {
        match src.next_bit() {
            Some(b) => data.push(b),
            None => return Ok(Pull::Truncated),
        }
    }
    Ok(Pull::Done(Program {
        spec: TmSpec { states: s, table },
        data,
    }))
}

/// Decodes a program from the front of `bits`, returning it with the number
/// of bits consumed.
pub fn decode_prefix(bits: &[bool]) -> Result<(Program, usize)> {
    let mut c = Cursor::new(bits);
    match pull_program(&mut c, None)? {
        Pull::Done(p) => Ok((p, c.pos)),
        Pull::Truncated => Err(LabError::Encoding("truncated program".into())),
        Pull::Invalid(msg) => Err(LabError::Encoding(msg)),
        Pull::TooManyStates => unreachable!("no state cap given"),
    }
}

impl ProgramBits {
    pub fn bits(&self) -> &Bits {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Decodes the whole string; trailing bits make it invalid.
    pub fn decode(&self) -> Result<Program> {
        let (p, used) = decode_prefix(&self.0)?;
        if used != self.0.len() {
            return Err(LabError::Encoding(format!(
                "{} trailing bits after program",
                self.0.len() - used
            )));
        }
        Ok(p)
    }

    pub fn is_valid(bits: &[bool]) -> bool {
        matches!(decode_prefix(bits), Ok((_, used)) if used == bits.len())
    }
}

/// The 1-state machine that halts at once, writing back what it read:
/// running it on any condition leaves the condition unchanged.
pub fn copy_program() -> Program {
    Program {
        spec: TmSpec {
            states: 1,
            table: vec![Entry::new(false, Move::Right, 0), Entry::new(true, Move::Right, 0)],
        },
        data: Bits::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_widths() {
        assert_eq!(next_field_bits(1), 1);
        assert_eq!(next_field_bits(2), 2);
        assert_eq!(next_field_bits(3), 2);
        assert_eq!(next_field_bits(4), 3);
        assert_eq!(next_field_bits(7), 3);
    }

    #[test]
    fn copy_program_layout() {
        let p = copy_program().encode();
        assert_eq!(p.to_string(), "10101101");
        assert_eq!(p.len(), 8);
        assert_eq!(p.decode().unwrap(), copy_program());
    }

    #[test]
    fn index_roundtrip() {
        for s in 1..=3u32 {
            for idx in [0, 1, 17, TmSpec::space_size(s) - 1] {
                let spec = TmSpec::from_index(s, idx);
                assert!(spec.validate().is_ok());
                assert_eq!(spec.index(), idx);
            }
        }
    }

    #[test]
    fn rejects_bad_tables_and_trailing_bits() {
        // s = 2, first entry with next = 3
        let bad = Bits::lit("010001100000000000001");
        assert!(ProgramBits(bad).decode().is_err());
        let mut trailing = copy_program().encode().0;
        trailing.push(false);
        assert!(ProgramBits(trailing).decode().is_err());
        assert!(TmSpec::new(1, vec![]).is_err());
    }
}
