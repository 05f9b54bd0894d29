//! Bit strings.
//!
//! Every object the lab measures (programs, states, trajectories, graphs,
//! payloads) is ultimately a finite bit string. `Bits` serializes as ASCII
//! `0`/`1` text; the hex form carries an explicit bit length because the
//! last nibble may be partial.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        Bits(Vec::with_capacity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Bits(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Bits(vec![true; n])
    }

    pub fn from_vec(v: Vec<bool>) -> Self {
        Bits(v)
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.0
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Parse a `0`/`1` string. Panics on any other character; use
    /// [`str::parse`] for fallible parsing.
    pub fn lit(s: &str) -> Self {
        s.parse().expect("bit literal must contain only '0' and '1'")
    }

    /// Big-endian, fixed `width` binary representation of `value`.
    pub fn from_uint(value: u64, width: usize) -> Self {
        Bits((0..width).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect())
    }

    /// Reads the bits as a big-endian unsigned integer. Values wider than 64
    /// significant bits are not representable.
    pub fn to_uint(&self) -> Option<u64> {
        let trimmed = self.strip_leading_zeros();
        if trimmed.len() > 64 {
            return None;
        }
        Some(trimmed.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn strip_leading_zeros(&self) -> &[bool] {
        let first = self.0.iter().position(|&b| b).unwrap_or(self.0.len());
        &self.0[first..]
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn extend_bits(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(parts: &[&Bits]) -> Bits {
        let mut out = Bits::with_capacity(parts.iter().map(|p| p.len()).sum());
        for p in parts {
            out.extend_bits(p);
        }
        out
    }

    pub fn slice(&self, start: usize, end: usize) -> Bits {
        Bits(self.0[start..end].to_vec())
    }

    pub fn to_hex(&self) -> String {
        let mut bytes = Vec::with_capacity(self.len().div_ceil(8));
        for chunk in self.0.chunks(8) {
            let mut byte = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 0x80 >> i;
                }
            }
            bytes.push(byte);
        }
        hex::encode(bytes)
    }

    pub fn from_hex(hex_str: &str, bit_len: usize) -> Result<Bits> {
        let bytes = hex::decode(hex_str).map_err(|e| LabError::Encoding(format!("bad hex: {e}")))?;
        if bytes.len() * 8 < bit_len || bytes.len() > bit_len.div_ceil(8) {
            return Err(LabError::Encoding(format!(
                "hex length {} does not match bit length {bit_len}",
                hex_str.len()
            )));
        }
        let mut out = Bits::with_capacity(bit_len);
        for i in 0..bit_len {
            out.push(bytes[i / 8] & (0x80 >> (i % 8)) != 0);
        }
        Ok(out)
    }

    /// `<bit_len>:<hex>` form used for programs in reports.
    pub fn to_len_hex(&self) -> String {
        format!("{}:{}", self.len(), self.to_hex())
    }

    pub fn from_len_hex(s: &str) -> Result<Bits> {
        let (len, hex_part) = s
            .split_once(':')
            .ok_or_else(|| LabError::Encoding(format!("expected <len>:<hex>, got {s:?}")))?;
        let len: usize = len
            .parse()
            .map_err(|_| LabError::Encoding(format!("bad bit length {len:?}")))?;
        Bits::from_hex(hex_part, len)
    }
}

impl Deref for Bits {
    type Target = Vec<bool>;
    fn deref(&self) -> &Vec<bool> {
        &self.0
    }
}

impl DerefMut for Bits {
    fn deref_mut(&mut self) -> &mut Vec<bool> {
        &mut self.0
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Bits(iter.into_iter().collect())
    }
}

impl From<&[bool]> for Bits {
    fn from(s: &[bool]) -> Self {
        Bits(s.to_vec())
    }
}

impl FromStr for Bits {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(LabError::Encoding(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits(\"{self}\")")
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
