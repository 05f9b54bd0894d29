//! The reference machine: self-delimiting encodings of small two-symbol
//! Turing machines plus a data payload, a step-bounded interpreter, and
//! exhaustive enumeration and sampling of machine spaces.

pub mod codec;
pub mod context;
pub mod enumerate;
pub mod interp;
pub mod program;
pub mod sample;

pub use codec::{gamma_decode, gamma_encode, pair_decode, pair_encode, tuple_decode, tuple_encode};
pub use context::{AddressedProgram, Context, Selector};
pub use enumerate::{enumerate_machines, EnumerationSummary};
pub use interp::{run, run_bits, Config, RunResult};
pub use program::{copy_program, decode_prefix, Entry, Move, Program, ProgramBits, TmSpec};
pub use sample::sample_program;

/// Length of the copy program, the constant in `K(w | w) <= c_copy`.
pub const C_COPY: usize = 8;
