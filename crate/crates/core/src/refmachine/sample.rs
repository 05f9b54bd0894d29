//! Sampling programs by feeding fair coin flips to the self-delimiting
//! decoder, so a program of length `l` is drawn with probability
//! proportional to `2^-l`.
//!
//! Draws whose state count exceeds `s_max`, or whose table holds an
//! out-of-range next state, are discarded and the draw restarts. Both
//! rejections renormalize the distribution over the surviving programs.

use rand::RngCore;

use super::codec::BitSource;
use super::program::{pull_program, Program, ProgramBits, Pull};
use crate::bits::Bits;

struct CoinFlips<'a, R: RngCore> {
    rng: &'a mut R,
    buf: u64,
    left: u32,
    drawn: Bits,
}

impl<R: RngCore> BitSource for CoinFlips<'_, R> {
    fn next_bit(&mut self) -> Option<bool> {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        self.drawn.push(b);
        Some(b)
    }
}

pub fn sample_program<R: RngCore>(rng: &mut R, s_max: u32) -> ProgramBits {
    sample_decoded(rng, s_max).1
}

pub fn sample_decoded<R: RngCore>(rng: &mut R, s_max: u32) -> (Program, ProgramBits) {
    assert!(s_max >= 1);
    let mut src = CoinFlips {
        rng,
        buf: 0,
        left: 0,
        drawn: Bits::new(),
    };
    loop {
        src.drawn.clear();
        match pull_program(&mut src, Some(s_max)) {
            Ok(Pull::Done(p)) => return (p, ProgramBits(src.drawn)),
            // an infinite coin stream never truncates; gamma overflow (65+
            // leading zeros) is a rejection like any other
            Ok(_) | Err(_) => continue,
        }
    }
}
