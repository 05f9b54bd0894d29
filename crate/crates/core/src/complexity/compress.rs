//! A self-contained bit-level compressor used for upper bounds.
//!
//! Every encoding is `tag(2) . gamma(|x|+1) . payload` with
//!
//! * `00` literal: the bits of `x`;
//! * `01` run-length: first bit, then `gamma(run)` per run;
//! * `10` dictionary parse: tokens `0 b` (one literal bit) or
//!   `1 gamma(offset) gamma(len-1)` (copy `len` bits from `offset` back,
//!   overlaps allowed).
//!
//! The compressor emits the shortest of the three, so its length never
//! exceeds the literal path `|x| + 2 + |gamma(|x|+1)|`.

use std::collections::HashMap;

use crate::bits::Bits;
use crate::error::{LabError, Result};
use crate::refmachine::codec::{gamma_len, push_gamma, BitSource, Cursor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Literal,
    RunLength,
    Dictionary,
}

impl Method {
    fn tag(self) -> [bool; 2] {
        match self {
            Method::Literal => [false, false],
            Method::RunLength => [false, true],
            Method::Dictionary => [true, false],
        }
    }
}

/// Header cost of the literal path for a string of length `n`.
pub fn literal_header_bits(n: usize) -> usize {
    2 + gamma_len(n as u64 + 1)
}

fn header(method: Method, n: usize) -> Bits {
    let mut out = Bits::from_vec(method.tag().to_vec());
    push_gamma(&mut out, n as u64 + 1);
    out
}

fn encode_literal(x: &Bits) -> Bits {
    let mut out = header(Method::Literal, x.len());
    out.extend_bits(x);
    out
}

fn encode_rle(x: &Bits) -> Bits {
    let mut out = header(Method::RunLength, x.len());
    if x.is_empty() {
        return out;
    }
    out.push(x[0]);
    let mut run = 1u64;
    for w in x.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            push_gamma(&mut out, run);
            run = 1;
        }
    }
    push_gamma(&mut out, run);
    out
}

const HASH_K: usize = 12;
const SHORT_WINDOW: usize = 32;
const CHAIN_LIMIT: usize = 512;

fn match_len(x: &[bool], src: usize, pos: usize) -> usize {
    let mut l = 0;
    while pos + l < x.len() && x[src + l] == x[pos + l] {
        l += 1;
    }
    l
}

fn kgram(x: &[bool], i: usize) -> u32 {
    x[i..i + HASH_K].iter().fold(0u32, |a, &b| (a << 1) | b as u32)
}

fn encode_dictionary(x: &Bits) -> Bits {
    let mut out = header(Method::Dictionary, x.len());
    let xs = x.as_slice();
    let n = xs.len();
    let mut chains: HashMap<u32, Vec<usize>> = HashMap::new();
    let mut indexed = 0usize;
    let mut i = 0usize;
    while i < n {
        // index every k-gram starting before i
        while indexed < i {
            if indexed + HASH_K <= n {
                chains.entry(kgram(xs, indexed)).or_default().push(indexed);
            }
            indexed += 1;
        }
        let mut best: Option<(usize, usize)> = None; // (len, offset)
        let mut consider = |src: usize| {
            let l = match_len(xs, src, i);
            let off = i - src;
            if l >= 2 && best.is_none_or(|(bl, bo)| l > bl || (l == bl && off < bo)) {
                best = Some((l, off));
            }
        };
        for off in 1..=SHORT_WINDOW.min(i) {
            consider(i - off);
        }
        if i + HASH_K <= n {
            if let Some(chain) = chains.get(&kgram(xs, i)) {
                for &src in chain.iter().rev().take(CHAIN_LIMIT) {
                    consider(src);
                }
            }
        }
        match best {
            Some((len, off)) if 1 + gamma_len(off as u64) + gamma_len(len as u64 - 1) < 2 * len => {
                out.push(true);
                push_gamma(&mut out, off as u64);
                push_gamma(&mut out, len as u64 - 1);
                i += len;
            }
            _ => {
                out.push(false);
                out.push(xs[i]);
                i += 1;
            }
        }
    }
    out
}

/// Shortest encoding over the three methods, with its method.
pub fn compress_with_method(x: &Bits) -> (Bits, Method) {
    let mut best = (encode_literal(x), Method::Literal);
    for (enc, m) in [
        (encode_rle(x), Method::RunLength),
        (encode_dictionary(x), Method::Dictionary),
    ] {
        if enc.len() < best.0.len() {
            best = (enc, m);
        }
    }
    best
}

pub fn compress(x: &Bits) -> Bits {
    compress_with_method(x).0
}

pub fn compressed_len(x: &Bits) -> usize {
    compress(x).len()
}

fn truncated() -> LabError {
    LabError::Encoding("truncated compressed stream".into())
}

pub fn decompress(code: &[bool]) -> Result<Bits> {
    let mut c = Cursor::new(code);
    let t0 = c.next_bit().ok_or_else(truncated)?;
    let t1 = c.next_bit().ok_or_else(truncated)?;
    let n = (c.read_gamma()?.ok_or_else(truncated)? - 1) as usize;
    let mut out = Bits::with_capacity(n);
    match (t0, t1) {
        (false, false) => {
            out.extend_from_slice(c.take(n).ok_or_else(truncated)?);
        }
        (false, true) => {
            if n > 0 {
                let mut b = c.next_bit().ok_or_else(truncated)?;
                while out.len() < n {
                    let run = c.read_gamma()?.ok_or_else(truncated)? as usize;
                    if out.len() + run > n {
                        return Err(LabError::Encoding("run overflows length".into()));
                    }
                    out.extend(std::iter::repeat_n(b, run));
                    b = !b;
                }
            }
        }
        (true, false) => {
            while out.len() < n {
                if c.next_bit().ok_or_else(truncated)? {
                    let off = c.read_gamma()?.ok_or_else(truncated)? as usize;
                    let len = c.read_gamma()?.ok_or_else(truncated)? as usize + 1;
                    if off > out.len() || out.len() + len > n {
                        return Err(LabError::Encoding("bad back-reference".into()));
                    }
                    let start = out.len() - off;
                    for k in 0..len {
                        let b = out[start + k];
                        out.push(b);
                    }
                } else {
                    out.push(c.next_bit().ok_or_else(truncated)?);
                }
            }
        }
        (true, true) => return Err(LabError::Encoding("reserved method tag".into())),
    }
    if c.remaining() != 0 {
        return Err(LabError::Encoding("trailing bits after compressed stream".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_string_is_header_only() {
        let c = compress(&Bits::new());
        assert_eq!(c.len(), 3);
        assert_eq!(decompress(&c).unwrap(), Bits::new());
    }

    #[test]
    fn long_zero_run_is_short() {
        let x = Bits::zeros(256);
        let (c, m) = compress_with_method(&x);
        assert!(c.len() <= 40, "{} bits via {m:?}", c.len());
        assert_eq!(decompress(&c).unwrap(), x);
    }

    #[test]
    fn repeated_block_uses_dictionary() {
        let block = Bits::lit("1101001110010111");
        let mut x = Bits::new();
        for _ in 0..16 {
            x.extend_bits(&block);
        }
        let (c, m) = compress_with_method(&x);
        assert_eq!(m, Method::Dictionary);
        assert!(c.len() < 80);
        assert_eq!(decompress(&c).unwrap(), x);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decompress(&Bits::lit("11")).is_err());
        assert!(decompress(&Bits::lit("00010")).is_err());
        assert!(decompress(&Bits::lit("0001011")).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_and_literal_bound(v in proptest::collection::vec(any::<bool>(), 0..400)) {
            let x = Bits::from_vec(v);
            let c = compress(&x);
            prop_assert!(c.len() <= x.len() + literal_header_bits(x.len()));
            prop_assert_eq!(decompress(&c).unwrap(), x);
        }
    }
}
