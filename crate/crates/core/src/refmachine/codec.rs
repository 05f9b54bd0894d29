//! Elias-gamma integers and the `<x, y>` pairing function.

use crate::bits::Bits;
use crate::error::{LabError, Result};

/// Something bits can be pulled from one at a time: a slice cursor when
/// decoding, a random stream when sampling programs.
pub trait BitSource {
    fn next_bit(&mut self) -> Option<bool>;

    fn read_uint(&mut self, width: usize) -> Option<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.next_bit()? as u64;
        }
        Some(v)
    }

    /// Reads one Elias-gamma codeword. `Ok(None)` means the source ran dry
    /// before the codeword completed.
    fn read_gamma(&mut self) -> Result<Option<u64>> {
        let mut zeros = 0usize;
        loop {
            match self.next_bit() {
                None => return Ok(None),
                Some(false) => zeros += 1,
                Some(true) => break,
            }
            if zeros > 63 {
                return Err(LabError::Encoding("gamma codeword exceeds 64 bits".into()));
            }
        }
        let mut v = 1u64;
        for _ in 0..zeros {
            match self.next_bit() {
                None => return Ok(None),
                Some(b) => v = (v << 1) | b as u64,
            }
        }
        Ok(Some(v))
    }
}

pub struct Cursor<'a> {
    bits: &'a [bool],
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        Cursor { bits, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Option<&'a [bool]> {
        if self.remaining() < n {
            return None;
        }
        let s = &self.bits[self.pos..self.pos + n];
        self.pos += n;
        Some(s)
    }

    pub fn rest(&mut self) -> &'a [bool] {
        let s = &self.bits[self.pos..];
        self.pos = self.bits.len();
        s
    }
}

impl BitSource for Cursor<'_> {
    fn next_bit(&mut self) -> Option<bool> {
        let b = self.bits.get(self.pos).copied();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }
}

pub fn gamma_len(n: u64) -> usize {
    debug_assert!(n >= 1);
    2 * (63 - n.leading_zeros() as usize) + 1
}

pub fn push_gamma(out: &mut Bits, n: u64) {
    let nbits = 64 - n.leading_zeros() as usize;
    out.extend(std::iter::repeat_n(false, nbits - 1));
    for i in (0..nbits).rev() {
        out.push((n >> i) & 1 == 1);
    }
}

pub fn gamma_encode(n: u64) -> Result<Bits> {
    if n == 0 {
        return Err(LabError::Domain("Elias gamma is undefined for 0".into()));
    }
    let mut out = Bits::with_capacity(gamma_len(n));
    push_gamma(&mut out, n);
    Ok(out)
}

/// Decodes one codeword from the front of `bits`, returning the value and
/// the number of bits consumed.
pub fn gamma_decode(bits: &[bool]) -> Result<(u64, usize)> {
    let mut c = Cursor::new(bits);
    match c.read_gamma()? {
        Some(v) => Ok((v, c.pos)),
        None => Err(LabError::Encoding("truncated gamma codeword".into())),
    }
}

/// `<x, y> = gamma(|x|+1) . x . y`
pub fn pair_encode(x: &Bits, y: &Bits) -> Bits {
    let mut out = Bits::with_capacity(gamma_len(x.len() as u64 + 1) + x.len() + y.len());
    push_gamma(&mut out, x.len() as u64 + 1);
    out.extend_bits(x);
    out.extend_bits(y);
    out
}

pub fn pair_decode(bits: &[bool]) -> Result<(Bits, Bits)> {
    let mut c = Cursor::new(bits);
    let xlen = c
        .read_gamma()?
        .ok_or_else(|| LabError::Encoding("truncated pair header".into()))?
        - 1;
    let x = c
        .take(xlen as usize)
        .ok_or_else(|| LabError::Encoding("pair payload shorter than header".into()))?;
    Ok((Bits::from(x), Bits::from(c.rest())))
}

/// Left fold of the pairing function: `<<<a, b>, c>, d>`. A one-element
/// tuple is the element itself; the empty tuple is the empty string.
pub fn tuple_encode(parts: &[Bits]) -> Bits {
    let mut iter = parts.iter();
    let Some(first) = iter.next() else {
        return Bits::new();
    };
    iter.fold(first.clone(), |acc, p| pair_encode(&acc, p))
}

pub fn tuple_decode(bits: &[bool], n: usize) -> Result<Vec<Bits>> {
    if n == 0 {
        return if bits.is_empty() {
            Ok(Vec::new())
        } else {
            Err(LabError::Encoding("trailing bits after empty tuple".into()))
        };
    }
    let mut out = Vec::with_capacity(n);
    let mut acc = Bits::from(bits);
    for _ in 1..n {
        let (head, last) = pair_decode(&acc)?;
        out.push(last);
        acc = head;
    }
    out.push(acc);
    out.reverse();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_encode(1).unwrap().to_string(), "1");
        assert_eq!(gamma_encode(2).unwrap().to_string(), "010");
        assert_eq!(gamma_encode(4).unwrap().to_string(), "00100");
        assert!(matches!(gamma_encode(0), Err(LabError::Domain(_))));
    }

    #[test]
    fn gamma_consumes_exactly_its_bits() {
        for n in 1..2000u64 {
            let mut b = gamma_encode(n).unwrap();
            assert_eq!(b.len(), gamma_len(n));
            b.extend_bits(&Bits::lit("1101"));
            assert_eq!(gamma_decode(&b).unwrap(), (n, gamma_len(n)));
        }
    }

    #[test]
    fn pair_examples() {
        assert_eq!(pair_encode(&Bits::new(), &Bits::new()).to_string(), "1");
        assert_eq!(pair_encode(&Bits::lit("1"), &Bits::lit("0")).to_string(), "01010");
    }

    #[test]
    fn truncated_inputs_error() {
        assert!(gamma_decode(&Bits::lit("000")).is_err());
        assert!(pair_decode(&Bits::lit("011")).is_err());
    }

    proptest! {
        #[test]
        fn pair_roundtrip(x in proptest::collection::vec(any::<bool>(), 0..64),
                          y in proptest::collection::vec(any::<bool>(), 0..64)) {
            let (x, y) = (Bits::from_vec(x), Bits::from_vec(y));
            let (dx, dy) = pair_decode(&pair_encode(&x, &y)).unwrap();
            prop_assert_eq!(dx, x);
            prop_assert_eq!(dy, y);
        }

        #[test]
        fn tuple_roundtrip(parts in proptest::collection::vec(
            proptest::collection::vec(any::<bool>(), 0..20), 1..6)) {
            let parts: Vec<Bits> = parts.into_iter().map(Bits::from_vec).collect();
            let enc = tuple_encode(&parts);
            prop_assert_eq!(tuple_decode(&enc, parts.len()).unwrap(), parts);
        }
    }
}
